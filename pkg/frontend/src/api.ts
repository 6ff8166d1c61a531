/**
 * Typed client for the storyforge service API. Every method maps to one
 * endpoint; service error documents surface as ApiError with the stable
 * error code, so views can branch on codes rather than status text.
 */

import type {
  JobInfo,
  Profile,
  ProfileEntity,
  ReadingEvent,
  RewardOutcome,
  SessionInfo,
  StatsReport,
  Sticker,
  StoryDocument,
  StoryListItem,
} from "./types";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** Network-level failure (offline, DNS, refused); retriable by queueing. */
export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(`network unavailable: ${String(cause)}`);
    this.name = "NetworkError";
  }
}

export class ForgeClient {
  constructor(
    private readonly baseUrl: string,
    private readonly account: string = "family",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, {
        method,
        headers: {
          "content-type": "application/json",
          "x-account": this.account,
        },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (cause) {
      throw new NetworkError(cause);
    }
    if (response.status === 204) {
      return undefined as T;
    }
    const payload = await response.json();
    if (!response.ok) {
      throw new ApiError(
        typeof payload?.error === "string" ? payload.error : "unknown",
        typeof payload?.message === "string" ? payload.message : response.statusText,
        response.status,
      );
    }
    return payload as T;
  }

  // -- profile management --

  getProfile(): Promise<Profile> {
    return this.request("GET", `/v1/profiles/${this.account}`);
  }

  upsertEntity(body: {
    kind: ProfileEntity["kind"];
    name: string;
    description?: string;
    photo_data?: string;
    id?: string;
  }): Promise<ProfileEntity> {
    return this.request("POST", `/v1/profiles/${this.account}/entities`, body);
  }

  deleteEntity(entityId: string): Promise<void> {
    return this.request("DELETE", `/v1/profiles/${this.account}/entities/${entityId}`);
  }

  upsertSticker(body: { label: string; image?: string; photo_data?: string }): Promise<Sticker> {
    return this.request("POST", `/v1/profiles/${this.account}/stickers`, body);
  }

  setChildPhoto(photoData: string): Promise<{ name: string; photo: string | null }> {
    return this.request("POST", `/v1/profiles/${this.account}/child/photo`, {
      photo_data: photoData,
    });
  }

  setChild(body: { name?: string; photo_data?: string }): Promise<{ name: string }> {
    return this.request("PUT", `/v1/profiles/${this.account}/child`, body);
  }

  // -- stories --

  createStory(body: {
    interests: string[];
    behavior: string;
    sticker_id: string;
    translate?: boolean;
  }): Promise<{ job_id: string }> {
    return this.request("POST", "/v1/stories", body);
  }

  getJob(jobId: string): Promise<JobInfo> {
    return this.request("GET", `/v1/jobs/${jobId}`);
  }

  listStories(): Promise<{ stories: StoryListItem[] }> {
    return this.request("GET", "/v1/stories");
  }

  getStory(storyId: string, version?: number): Promise<StoryDocument> {
    const suffix = version === undefined ? "" : `?version=${version}`;
    return this.request("GET", `/v1/stories/${storyId}${suffix}`);
  }

  editSectionText(storyId: string, sectionId: string, text: string): Promise<StoryDocument> {
    return this.request("PATCH", `/v1/stories/${storyId}/sections/${sectionId}`, { text });
  }

  regenerateImage(storyId: string, sectionId: string): Promise<{ image_ref: string; version: number }> {
    return this.request("POST", `/v1/stories/${storyId}/sections/${sectionId}/image`);
  }

  // -- reading sessions --

  startSession(storyId: string, device: "reader" | "creator", startedAt?: string): Promise<SessionInfo> {
    return this.request("POST", "/v1/sessions", {
      story_id: storyId,
      device,
      started_at: startedAt,
    });
  }

  postEvent(sessionId: string, event: ReadingEvent): Promise<ReadingEvent> {
    return this.request("POST", `/v1/sessions/${sessionId}/events`, event);
  }

  completeSession(sessionId: string, at?: string): Promise<RewardOutcome> {
    return this.request("POST", `/v1/sessions/${sessionId}/complete`, { at });
  }

  // -- analytics --

  stats(start: string, end: string): Promise<StatsReport> {
    return this.request("GET", `/v1/stats?start=${start}&end=${end}`);
  }
}
