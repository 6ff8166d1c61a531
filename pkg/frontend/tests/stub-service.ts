/**
 * In-memory stub of the storyforge service, speaking the same wire contract.
 * Tests point the typed client's fetch at `stub.fetch`.
 */

import type { FetchLike } from "../src/api";
import type {
  JobInfo,
  Profile,
  SessionInfo,
  Sticker,
  StoryDocument,
} from "../src/types";

export function storyFixture(): StoryDocument {
  const cue = (character: string, emotion: string, response: string) => [
    { character, emotion, observable_response: response },
  ];
  return {
    format_version: "1",
    version: 1,
    story: {
      id: "story-fixture",
      title: "A Good Day with the Fire Truck",
      topic_type: "social_rules",
      target_behavior: {
        text: "keeping calm during story time",
        classified_type: "social_rules",
      },
      reward_sticker: "sticker-fire",
      created_at: "2026-08-01T00:00:00+00:00",
      language: { source: "en", translation: null },
    },
    sections: [
      { id: "cover", kind: "cover", text: "A Good Day with the Fire Truck",
        illustration: "img-c", emotion_cues: [], next: ["intro"] },
      { id: "intro", kind: "introduction", text: "Alex holds the fire truck.",
        illustration: "img-i", emotion_cues: [], next: ["challenge"] },
      { id: "challenge", kind: "challenge", text: "What should Alex do?",
        illustration: "img-ch", emotion_cues: [], next: ["decision-1", "decision-2"] },
      { id: "decision-1", kind: "decision", text: "Alex stays calm.",
        illustration: "img-d1", emotion_cues: [], next: ["consequence-1"] },
      { id: "consequence-1", kind: "consequence", text: "The teacher smiles.",
        illustration: "img-c1", emotion_cues: cue("Ms. Lee", "proud", "smiles"),
        next: ["ending"] },
      { id: "decision-2", kind: "decision", text: "Alex shouts.",
        illustration: "img-d2", emotion_cues: [], next: ["consequence-2"] },
      { id: "consequence-2", kind: "consequence", text: "The teacher frowns.",
        illustration: "img-c2", emotion_cues: cue("Ms. Lee", "upset", "frowns"),
        next: ["repair-2"] },
      { id: "repair-2", kind: "repair", text: "Please wait for your turn.",
        illustration: "img-r2", emotion_cues: [], next: ["response-2"] },
      { id: "response-2", kind: "response", text: "Alex says sorry.",
        illustration: "img-re2", emotion_cues: [], next: ["repaired-2"] },
      { id: "repaired-2", kind: "repaired_consequence", text: "The teacher nods.",
        illustration: "img-rc2", emotion_cues: cue("Ms. Lee", "glad", "nods"),
        next: ["ending"] },
      { id: "ending", kind: "ending", text: "Alex feels proud.",
        illustration: "img-e", emotion_cues: [], next: [] },
    ],
    paths: {
      root: "cover",
      challenge: "challenge",
      ending: "ending",
      desirable: ["cover", "intro", "challenge", "decision-1", "consequence-1", "ending"],
      undesirable: [[
        "cover", "intro", "challenge", "decision-2", "consequence-2",
        "repair-2", "response-2", "repaired-2", "ending",
      ]],
    },
    profile_snapshot: {
      child_name: "Alex",
      child_photo: "img-child01",
      entities: [
        { id: "int-1", kind: "interest", name: "fire trucks" },
        { id: "per-1", kind: "person", name: "Ms. Lee" },
        { id: "pla-1", kind: "place", name: "classroom" },
      ],
    },
    edit_log: [],
    preprocessing: { sections: {}, entities: {}, roster: {} },
  };
}

export function completeProfile(): Profile {
  return {
    child: { name: "Alex", photo: "img-child01" },
    entities: [
      { id: "int-1", kind: "interest", name: "fire trucks", description: "", photo: null },
      { id: "per-1", kind: "person", name: "Ms. Lee", description: "", photo: null },
      { id: "pla-1", kind: "place", name: "classroom", description: "", photo: null },
    ],
    stickers: [
      { id: "sticker-star", label: "Star", image: "img-star", kind: "star" },
      { id: "sticker-fire", label: "Fire Truck", image: "img-fire", kind: "custom" },
    ],
  };
}

export function incompleteProfile(): Profile {
  const profile = completeProfile();
  return { ...profile, child: { name: "Alex", photo: null }, entities: [] };
}

interface StubSession {
  info: SessionInfo;
  events: Array<Record<string, unknown>>;
  completed: boolean;
}

export class StubService {
  profile: Profile = completeProfile();
  story: StoryDocument = storyFixture();
  /** Status sequence returned by successive job polls. */
  jobStatuses: Array<JobInfo["status"]> = ["pending", "running", "complete"];
  createStoryError: { status: number; error: string; message: string } | null = null;
  /** Server-decided option presentation order: positions -> actual index. */
  optionMapping: number[] = [1, 0];

  requests: Array<{ method: string; path: string; body: unknown }> = [];
  imageRegenerations: string[] = [];
  postedEvents: Array<{ sessionId: string; body: Record<string, unknown> }> = [];
  private jobPolls = 0;
  private sessionCounter = 0;
  private sessions = new Map<string, StubSession>();

  readonly fetch: FetchLike = async (url, init) => {
    const method = (init?.method ?? "GET").toUpperCase();
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    this.requests.push({ method, path, body });
    return this.route(method, path, body);
  };

  private json(payload: unknown, status = 200): Response {
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "content-type": "application/json" },
    });
  }

  private error(status: number, error: string, message: string): Response {
    return this.json({ error, message }, status);
  }

  private route(method: string, path: string, body: any): Response {
    if (method === "GET" && /^\/v1\/profiles\/[^/]+$/.test(path)) {
      return this.json(this.profile);
    }
    if (method === "POST" && path === "/v1/stories") {
      if (this.createStoryError) {
        const { status, error, message } = this.createStoryError;
        return this.error(status, error, message);
      }
      this.jobPolls = 0;
      return this.json({ job_id: "job-1" }, 202);
    }
    if (method === "GET" && path.startsWith("/v1/jobs/")) {
      const index = Math.min(this.jobPolls, this.jobStatuses.length - 1);
      const status = this.jobStatuses[this.jobPolls] ?? this.jobStatuses[index];
      this.jobPolls += 1;
      const job: JobInfo = {
        id: "job-1",
        status,
        failed_stage: status === "failed" ? "generate" : null,
        failure_reason: status === "failed" ? "provider-unreachable" : null,
        story_id: status === "complete" ? this.story.story.id : null,
        created_at: "2026-08-01T00:00:00+00:00",
      };
      return this.json(job);
    }
    if (method === "GET" && path === "/v1/stories") {
      return this.json({
        stories: [{
          id: this.story.story.id,
          version: this.story.version ?? 1,
          title: this.story.story.title,
          topic_type: this.story.story.topic_type,
          behavior: this.story.story.target_behavior.text,
          created_at: this.story.story.created_at,
        }],
      });
    }
    if (method === "GET" && path.startsWith("/v1/stories/")) {
      return this.json(this.story);
    }
    if (method === "PATCH" && /\/sections\/[^/]+$/.test(path)) {
      const sectionId = path.split("/").at(-1) as string;
      const section = this.story.sections.find((s) => s.id === sectionId);
      if (!section) {
        return this.error(404, "not-found", `no section ${sectionId}`);
      }
      const structural = Object.keys(body).filter((key) => key !== "text");
      if (structural.length > 0) {
        return this.error(409, "structure-immutable", "only text may change");
      }
      section.text = body.text;
      this.story.version = (this.story.version ?? 1) + 1;
      return this.json(this.story);
    }
    if (method === "POST" && /\/sections\/[^/]+\/image$/.test(path)) {
      const sectionId = path.split("/").at(-2) as string;
      this.imageRegenerations.push(sectionId);
      this.story.version = (this.story.version ?? 1) + 1;
      return this.json({ image_ref: `img-new-${sectionId}`, version: this.story.version });
    }
    if (method === "POST" && path === "/v1/sessions") {
      this.sessionCounter += 1;
      const id = `session-${this.sessionCounter}`;
      const options = this.story.sections.find((s) => s.id === "challenge")?.next ?? [];
      const info: SessionInfo = {
        id,
        story_id: body.story_id,
        device: body.device ?? "reader",
        started_at: body.started_at ?? "2026-08-01T20:00:00+00:00",
        option_mapping: this.optionMapping,
        options: this.optionMapping.map((actual, position) => ({
          position,
          section_id: options[actual],
          text: this.story.sections.find((s) => s.id === options[actual])?.text ?? "",
        })),
      };
      this.sessions.set(id, { info, events: [], completed: false });
      return this.json(info, 201);
    }
    const eventMatch = path.match(/^\/v1\/sessions\/([^/]+)\/events$/);
    if (method === "POST" && eventMatch) {
      const session = this.sessions.get(eventMatch[1]);
      if (!session) {
        return this.error(404, "not-found", "no session");
      }
      if (body.type === "page_view" && !this.pageAccepted(session, body.section_id)) {
        return this.error(409, "invalid-transition", "section unreachable");
      }
      session.events.push(body);
      this.postedEvents.push({ sessionId: eventMatch[1], body });
      return this.json(body);
    }
    const completeMatch = path.match(/^\/v1\/sessions\/([^/]+)\/complete$/);
    if (method === "POST" && completeMatch) {
      const session = this.sessions.get(completeMatch[1]);
      if (!session) {
        return this.error(404, "not-found", "no session");
      }
      const visited = session.events
        .filter((event) => event.type === "page_view")
        .map((event) => event.section_id);
      if (!visited.includes("ending")) {
        return this.error(409, "incomplete-path", "not at the ending");
      }
      session.completed = true;
      const desirable = visited.includes("decision-1");
      const sticker: Sticker = desirable
        ? { id: "sticker-fire", label: "Fire Truck", image: "img-fire", kind: "custom" }
        : { id: "sticker-star", label: "Star", image: "img-star", kind: "star" };
      return this.json({
        session_id: completeMatch[1],
        path_kind: desirable ? "desirable" : "undesirable",
        path: visited,
        sticker,
      });
    }
    return this.error(404, "not-found", `${method} ${path}`);
  }

  private pageAccepted(session: StubSession, sectionId: string): boolean {
    const visited = session.events
      .filter((event) => event.type === "page_view")
      .map((event) => event.section_id as string);
    if (sectionId === this.story.paths.root) {
      return true;
    }
    if (visited.includes(sectionId)) {
      return true;
    }
    const last = visited.at(-1);
    if (!last) {
      return false;
    }
    const lastSection = this.story.sections.find((s) => s.id === last);
    return lastSection?.next.includes(sectionId) ?? false;
  }
}
