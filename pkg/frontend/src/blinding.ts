// Defense in depth: the service already strips system identity from rater
// payloads; the client refuses to render payloads where any leaked through.

const FORBIDDEN_KEYS = new Set([
  "system_tag",
  "system",
  "model_name",
  "strategy",
  "metadata",
  "warnings",
  "provenance",
]);

export function blindingViolations(payload: unknown, path = ""): string[] {
  const out: string[] = [];
  if (Array.isArray(payload)) {
    payload.forEach((item, i) => {
      out.push(...blindingViolations(item, `${path}[${i}]`));
    });
  } else if (payload && typeof payload === "object") {
    for (const [key, value] of Object.entries(payload as Record<string, unknown>)) {
      const keyPath = path ? `${path}.${key}` : key;
      if (FORBIDDEN_KEYS.has(key)) {
        out.push(keyPath);
      }
      out.push(...blindingViolations(value, keyPath));
    }
  }
  return out;
}

export function assertBlinded<T>(payload: T, what: string): T {
  const violations = blindingViolations(payload);
  if (violations.length > 0) {
    throw new Error(
      `${what} payload leaks system identity at: ${violations.join(", ")}`);
  }
  return payload;
}
