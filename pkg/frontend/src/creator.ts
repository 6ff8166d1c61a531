/**
 * Creator-side flows: the story composer (interest picker, behavior field,
 * sticker picker, create button with job progress) and the story reviewer
 * (page text editing with stale-image badges, per-page image regeneration).
 * Thin over the service API: the only client-side rule is input validation
 * mirroring the API's preconditions so users see problems before a request.
 */

import { ApiError, ForgeClient } from "./api";
import type { JobInfo, Profile, StoryDocument } from "./types";

export interface ComposerState {
  selectedInterests: string[];
  behavior: string;
  stickerId: string | null;
  translate: boolean;
  validationError: string | null;
  jobId: string | null;
  jobStatus: JobInfo["status"] | null;
  failureReason: string | null;
  storyId: string | null;
}

export function emptyComposerState(): ComposerState {
  return {
    selectedInterests: [],
    behavior: "",
    stickerId: null,
    translate: false,
    validationError: null,
    jobId: null,
    jobStatus: null,
    failureReason: null,
    storyId: null,
  };
}

/**
 * Mirror of the service's create-story preconditions; returns the message to
 * show inline, or null when the request may be sent.
 */
export function validateComposerInput(profile: Profile, state: ComposerState): string | null {
  const kinds = new Set(profile.entities.map((entity) => entity.kind));
  if (!profile.child.photo || !kinds.has("interest") || !kinds.has("person") || !kinds.has("place")) {
    return "profile-incomplete: add the child's photo plus at least one interest, person, and place";
  }
  if (state.selectedInterests.length === 0) {
    return "select at least one interest to weave into the story";
  }
  if (!state.behavior.trim()) {
    return "describe the behavior the story should teach";
  }
  if (!state.stickerId) {
    return "pick a reward sticker";
  }
  return null;
}

export type Sleep = (ms: number) => Promise<void>;

const defaultSleep: Sleep = (ms) => new Promise((resolve) => setTimeout(resolve, ms));

export class StoryComposer {
  state: ComposerState = emptyComposerState();

  constructor(
    private readonly client: ForgeClient,
    private readonly sleep: Sleep = defaultSleep,
    private readonly pollIntervalMs: number = 500,
  ) {}

  /** Validate locally, submit, and poll the job until it settles. */
  async submit(profile: Profile): Promise<ComposerState> {
    const problem = validateComposerInput(profile, this.state);
    this.state.validationError = problem;
    if (problem !== null) {
      return this.state;
    }
    try {
      const { job_id } = await this.client.createStory({
        interests: this.state.selectedInterests,
        behavior: this.state.behavior,
        sticker_id: this.state.stickerId as string,
        translate: this.state.translate,
      });
      this.state.jobId = job_id;
      this.state.jobStatus = "pending";
    } catch (error) {
      if (error instanceof ApiError) {
        this.state.validationError = `${error.code}: ${error.message}`;
        return this.state;
      }
      throw error;
    }
    return this.pollUntilSettled();
  }

  async pollUntilSettled(maxPolls = 600): Promise<ComposerState> {
    if (!this.state.jobId) {
      return this.state;
    }
    for (let i = 0; i < maxPolls; i += 1) {
      const job = await this.client.getJob(this.state.jobId);
      this.state.jobStatus = job.status;
      if (job.status === "complete") {
        this.state.storyId = job.story_id;
        return this.state;
      }
      if (job.status === "failed") {
        this.state.failureReason = `${job.failed_stage}: ${job.failure_reason}`;
        return this.state;
      }
      await this.sleep(this.pollIntervalMs);
    }
    return this.state;
  }
}

/**
 * Review a finished story: edit page text and regenerate page images. A
 * text edit marks the page's illustration stale until it is redrawn.
 */
export class StoryReviewer {
  private stale = new Set<string>();

  constructor(
    private readonly client: ForgeClient,
    public document: StoryDocument,
  ) {}

  isStale(sectionId: string): boolean {
    return this.stale.has(sectionId);
  }

  sectionText(sectionId: string): string {
    const section = this.document.sections.find((s) => s.id === sectionId);
    if (!section) {
      throw new Error(`no section ${sectionId}`);
    }
    return section.text;
  }

  async editText(sectionId: string, text: string): Promise<StoryDocument> {
    const unchanged = this.sectionText(sectionId) === text;
    this.document = await this.client.editSectionText(this.document.story.id, sectionId, text);
    if (!unchanged) {
      this.stale.add(sectionId);
    }
    return this.document;
  }

  async regenerateImage(sectionId: string): Promise<string> {
    const result = await this.client.regenerateImage(this.document.story.id, sectionId);
    this.document = await this.client.getStory(this.document.story.id, result.version);
    this.stale.delete(sectionId);
    return result.image_ref;
  }
}
