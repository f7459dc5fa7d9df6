export type Vec3 = [number, number, number];

export interface ClipJoint {
  name: string;
  parent: string | null;
  offset: Vec3;
  orientation: Vec3;
}

export interface ClipSkeleton {
  version: string;
  joints: ClipJoint[];
  end_sites: Record<string, Vec3>;
  body_parts: Record<string, string[]>;
}

export interface Keyframe {
  time: number;
  rotations: Record<string, Vec3>;
  root_translation: Vec3;
}

export interface ClipDocument {
  format: string;
  schema_version: number;
  skeleton_version: string;
  duration: number;
  keyframes: Keyframe[];
  skeleton?: ClipSkeleton;
}

export interface Pose {
  rotations: Record<string, Vec3>;
  rootTranslation: Vec3;
}

export interface PlanStep {
  step_number: number;
  time_range: [number, number];
  movement: string;
  initial_state: string;
  final_state: string;
}

export interface PlanDocument {
  instruction: { id: number; text: string };
  steps: PlanStep[];
}

export type TargetKind = "animation" | "high_level_plan";

export interface TaskInfo {
  task_id: string;
  target_kind: TargetKind;
  motion_id: number;
  instruction_text: string;
  artifact_url: string;
  rubric_url: string;
  completed: boolean;
}

export interface RatingSubmission {
  task_id: string;
  rater_id: string;
  score: number;
  bpq: Record<string, string> | null;
  comment: string;
}
