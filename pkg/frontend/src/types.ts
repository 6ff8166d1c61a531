/**
 * Payload types mirroring the service API documents.
 */

export type TopicType = "relationship" | "social_rules" | "healthy_habits";

export type SectionKind =
  | "cover"
  | "introduction"
  | "challenge"
  | "decision"
  | "consequence"
  | "repair"
  | "response"
  | "repaired_consequence"
  | "ending";

export interface EmotionCue {
  character: string;
  emotion: string;
  observable_response: string;
}

export interface SectionDoc {
  id: string;
  kind: SectionKind;
  text: string;
  translation?: string | null;
  illustration?: string | null;
  emotion_cues: EmotionCue[];
  next: string[];
}

export interface StoryDocument {
  format_version: "1";
  version?: number;
  story: {
    id: string;
    title: string;
    topic_type: TopicType;
    target_behavior: { text: string; classified_type: TopicType };
    reward_sticker: string | null;
    created_at: string;
    language: { source: string; translation?: string | null };
  };
  sections: SectionDoc[];
  paths: {
    root: string;
    challenge: string;
    ending: string;
    desirable: string[];
    undesirable: string[][];
  };
  profile_snapshot: {
    child_name: string;
    child_photo?: string | null;
    entities: Array<{
      id: string;
      kind: "interest" | "person" | "place";
      name: string;
      description?: string;
      photo?: string | null;
    }>;
  };
  edit_log: Array<{
    section_id: string;
    edited_at: string;
    old_digest: string;
    new_digest: string;
  }>;
  preprocessing?: Record<string, unknown>;
}

export interface StoryListItem {
  id: string;
  version: number;
  title: string;
  topic_type: TopicType;
  behavior: string;
  created_at: string;
}

export interface ProfileEntity {
  id: string;
  kind: "interest" | "person" | "place";
  name: string;
  description: string;
  photo: string | null;
}

export interface Sticker {
  id: string;
  label: string;
  image: string;
  kind: "custom" | "star";
}

export interface Profile {
  child: { name: string; photo: string | null };
  entities: ProfileEntity[];
  stickers: Sticker[];
}

export interface JobInfo {
  id: string;
  status: "pending" | "running" | "failed" | "complete";
  failed_stage: string | null;
  failure_reason: string | null;
  story_id: string | null;
  created_at: string;
  stage_log?: Array<{ stage: string; attempt: number; verdict: string }>;
  warnings?: string[];
}

/** An option card in the order the server decided to present it. */
export interface OptionCard {
  position: number;
  section_id: string;
  text: string;
}

export interface SessionInfo {
  id: string;
  story_id: string;
  device: "reader" | "creator";
  started_at: string;
  options: OptionCard[];
  option_mapping: number[];
}

export type ReadingEvent =
  | { type: "page_view"; section_id: string; t: string }
  | { type: "choice"; option_index: number; t: string };

export interface RewardOutcome {
  session_id: string;
  path_kind: "desirable" | "undesirable";
  path: string[];
  sticker: Sticker;
}

export interface StatsReport {
  range: { start: string; end: string };
  stories_created_per_day: Record<string, number>;
  sessions_completed_per_day: Record<string, number>;
  reading_minutes_by_hour_of_day: number[];
  device_breakdown: Record<string, { sessions: number; minutes: number }>;
}
