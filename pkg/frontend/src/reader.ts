/**
 * Reader-side state machine: paged reading, the challenge screen's option
 * cards, consequence playback, the reward ceremony, and the reread prompt.
 *
 * Two rules keep this honest:
 * - the reader never fabricates navigation: a page becomes current only
 *   after the service accepted its page_view (or it was queued offline);
 * - option cards render exactly in the server-supplied presentation order,
 *   never reshuffled client-side.
 */

import { ApiError, ForgeClient, NetworkError } from "./api";
import { OfflineEventQueue } from "./queue";
import type {
  OptionCard,
  ReadingEvent,
  RewardOutcome,
  SessionInfo,
  SectionDoc,
  StoryDocument,
} from "./types";

export interface ReaderViewState {
  sessionId: string;
  currentSectionId: string | null;
  visitedIds: string[];
  pendingOptions: OptionCard[] | null;
  rewardOverlay: RewardOutcome | null;
  rereadPrompt: boolean;
  lastError: string | null;
  offline: boolean;
}

export type Clock = () => string;

const isoNow: Clock = () => new Date().toISOString();

export class ReaderSession {
  readonly state: ReaderViewState;
  private readonly sections: Map<string, SectionDoc>;
  readonly queue: OfflineEventQueue;

  constructor(
    private readonly client: ForgeClient,
    readonly story: StoryDocument,
    readonly session: SessionInfo,
    private readonly clock: Clock = isoNow,
    queue?: OfflineEventQueue,
  ) {
    this.sections = new Map(story.sections.map((section) => [section.id, section]));
    this.queue = queue ?? new OfflineEventQueue((sid, event) => client.postEvent(sid, event));
    this.state = {
      sessionId: session.id,
      currentSectionId: null,
      visitedIds: [],
      pendingOptions: null,
      rewardOverlay: null,
      rereadPrompt: false,
      lastError: null,
      offline: false,
    };
  }

  section(sectionId: string): SectionDoc {
    const section = this.sections.get(sectionId);
    if (!section) {
      throw new Error(`no section ${sectionId}`);
    }
    return section;
  }

  /** Server-ordered option cards; the client never reorders them. */
  optionCards(): OptionCard[] {
    return [...this.session.options];
  }

  private async deliver(event: ReadingEvent): Promise<boolean> {
    if (this.state.offline) {
      this.queue.enqueue(this.session.id, event);
      return true;
    }
    try {
      await this.client.postEvent(this.session.id, event);
      return true;
    } catch (error) {
      if (error instanceof NetworkError) {
        this.state.offline = true;
        this.queue.enqueue(this.session.id, event);
        return true;
      }
      if (error instanceof ApiError) {
        this.state.lastError = `${error.code}: ${error.message}`;
        return false;
      }
      throw error;
    }
  }

  /** Move to a page; the view changes only if the event was accepted or queued. */
  async openPage(sectionId: string): Promise<boolean> {
    const event: ReadingEvent = {
      type: "page_view",
      section_id: sectionId,
      t: this.clock(),
    };
    const accepted = await this.deliver(event);
    if (!accepted) {
      return false;
    }
    this.state.currentSectionId = sectionId;
    if (!this.state.visitedIds.includes(sectionId)) {
      this.state.visitedIds.push(sectionId);
    }
    this.state.pendingOptions =
      sectionId === this.story.paths.challenge ? this.optionCards() : null;
    this.state.lastError = null;
    return true;
  }

  async start(): Promise<boolean> {
    return this.openPage(this.story.paths.root);
  }

  /** Follow the single forward link, or null on the challenge/ending pages. */
  forwardTarget(): string | null {
    if (!this.state.currentSectionId) {
      return this.story.paths.root;
    }
    const current = this.section(this.state.currentSectionId);
    if (current.next.length !== 1) {
      return null;
    }
    return current.next[0];
  }

  async turnForward(): Promise<boolean> {
    const target = this.forwardTarget();
    if (target === null) {
      return false;
    }
    return this.openPage(target);
  }

  async turnBack(): Promise<boolean> {
    const index = this.state.visitedIds.indexOf(this.state.currentSectionId ?? "");
    if (index <= 0) {
      return false;
    }
    return this.openPage(this.state.visitedIds[index - 1]);
  }

  /** Pick the option card at a presented position on the challenge screen. */
  async choose(position: number): Promise<boolean> {
    const card = this.session.options.find((option) => option.position === position);
    if (!card) {
      this.state.lastError = `invalid-transition: no option card ${position}`;
      return false;
    }
    const event: ReadingEvent = {
      type: "choice",
      option_index: position,
      t: this.clock(),
    };
    if (!(await this.deliver(event))) {
      return false;
    }
    return this.openPage(card.section_id);
  }

  /** Finish the read-through: reward ceremony, then the reread prompt. */
  async complete(): Promise<RewardOutcome | null> {
    try {
      const outcome = await this.client.completeSession(this.session.id, this.clock());
      this.state.rewardOverlay = outcome;
      this.state.rereadPrompt = true;
      return outcome;
    } catch (error) {
      if (error instanceof ApiError) {
        this.state.lastError = `${error.code}: ${error.message}`;
        return null;
      }
      throw error;
    }
  }

  /** Back online: flush queued events in order. */
  async reconnect(): Promise<number> {
    this.state.offline = false;
    return this.queue.flush();
  }
}

/** Rereading happens in a brand-new session on the same story. */
export async function startReread(
  client: ForgeClient,
  story: StoryDocument,
  clock: Clock = isoNow,
): Promise<ReaderSession> {
  const session = await client.startSession(story.story.id, "reader", clock());
  return new ReaderSession(client, story, session, clock);
}
