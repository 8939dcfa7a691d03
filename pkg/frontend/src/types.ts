// API body shapes, mirroring docs/api_schema.json on the server side.

export interface Person {
  person_id: number;
  name: string;
  relationship: string;
  notes: string;
  created_at: string;
  updated_at: string;
}

export interface Box {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export type FailureCode =
  | "NoFace"
  | "MultipleFaces"
  | "TooSmall"
  | "OffCenter"
  | "Blurry";

export interface FramingReport {
  pass: boolean;
  face: Box | null;
  failures: FailureCode[];
  size_ratio: number | null;
  center_offset: number | null;
  sharpness: number | null;
}

export interface EnrollResponse {
  encoding_id: number;
  framing: FramingReport;
}

export interface MemoMeta {
  memo_id: number;
  person_id: number | null;
  duration_s: number;
  created_at: string;
  label: string;
}

export interface Match {
  person_id: number;
  distance: number;
  matched: boolean;
}

export interface Profile {
  person: Person;
  memos: MemoMeta[];
  encoding_count: number;
  presentation_text: string;
}

export interface FaceHit {
  box: Box;
  match: Match | null;
  profile: Profile | null;
}

export interface RecognitionOutcome {
  faces: FaceHit[];
  timestamp: string;
}

export interface RecognitionEvent {
  event_id: number;
  outcome: RecognitionOutcome;
}

export interface ServiceConfig {
  association_window_s: number;
  framing: {
    min_size_ratio: number;
    max_center_offset: number;
    min_sharpness: number;
  };
  detector: {
    window: number;
    stride: number;
    pyramid_scale: number;
    nms_iou: number;
    min_face: number;
  };
  match_tolerance: number;
  backend: "native" | "python";
}

export interface ErrorBody {
  code: string;
  message: string;
  details?: unknown;
}
