import { beforeEach, describe, expect, it } from "vitest";

import { ForgeClient } from "../src/api";
import { StoryComposer, StoryReviewer, validateComposerInput } from "../src/creator";
import { renderComposer, renderReviewPage } from "../src/render";
import { completeProfile, incompleteProfile, StubService } from "./stub-service";

const instantSleep = () => Promise.resolve();

describe("composer validation", () => {
  it("mirrors the profile-incomplete precondition without a network call", async () => {
    const stub = new StubService();
    const client = new ForgeClient("", "family", stub.fetch);
    const composer = new StoryComposer(client, instantSleep, 0);
    composer.state.selectedInterests = ["fire trucks"];
    composer.state.behavior = "keeping calm during story time";
    composer.state.stickerId = "sticker-fire";

    const state = await composer.submit(incompleteProfile());
    expect(state.validationError).toContain("profile-incomplete");
    expect(stub.requests).toHaveLength(0);
  });

  it("requires an interest, a behavior, and a sticker", () => {
    const profile = completeProfile();
    const base = {
      selectedInterests: [] as string[],
      behavior: "",
      stickerId: null as string | null,
      translate: false,
      validationError: null,
      jobId: null,
      jobStatus: null,
      failureReason: null,
      storyId: null,
    };
    expect(validateComposerInput(profile, { ...base })).toContain("interest");
    expect(
      validateComposerInput(profile, { ...base, selectedInterests: ["fire trucks"] }),
    ).toContain("behavior");
    expect(
      validateComposerInput(profile, {
        ...base,
        selectedInterests: ["fire trucks"],
        behavior: "stay calm",
      }),
    ).toContain("sticker");
  });

  it("surfaces API errors verbatim for retry", async () => {
    const stub = new StubService();
    stub.createStoryError = {
      status: 409,
      error: "profile-incomplete",
      message: "complete the profile first",
    };
    const client = new ForgeClient("", "family", stub.fetch);
    const composer = new StoryComposer(client, instantSleep, 0);
    composer.state.selectedInterests = ["fire trucks"];
    composer.state.behavior = "stay calm";
    composer.state.stickerId = "sticker-fire";

    const state = await composer.submit(completeProfile());
    expect(state.validationError).toBe("profile-incomplete: complete the profile first");
  });
});

describe("job progress polling", () => {
  it("polls pending, running, then lands on the story", async () => {
    const stub = new StubService();
    stub.jobStatuses = ["pending", "running", "complete"];
    const client = new ForgeClient("", "family", stub.fetch);
    const composer = new StoryComposer(client, instantSleep, 0);
    composer.state.selectedInterests = ["fire trucks"];
    composer.state.behavior = "keeping calm during story time";
    composer.state.stickerId = "sticker-fire";

    const state = await composer.submit(completeProfile());
    expect(state.jobStatus).toBe("complete");
    expect(state.storyId).toBe("story-fixture");
    const polls = stub.requests.filter((r) => r.path.startsWith("/v1/jobs/"));
    expect(polls).toHaveLength(3);
  });

  it("reports a failed stage", async () => {
    const stub = new StubService();
    stub.jobStatuses = ["running", "failed"];
    const client = new ForgeClient("", "family", stub.fetch);
    const composer = new StoryComposer(client, instantSleep, 0);
    composer.state.selectedInterests = ["fire trucks"];
    composer.state.behavior = "stay calm";
    composer.state.stickerId = "sticker-fire";

    const state = await composer.submit(completeProfile());
    expect(state.jobStatus).toBe("failed");
    expect(state.failureReason).toBe("generate: provider-unreachable");
  });

  it("renders inline progress in the composer view", () => {
    const profile = completeProfile();
    const html = renderComposer(profile, {
      selectedInterests: ["fire trucks"],
      behavior: "stay calm",
      stickerId: "sticker-fire",
      translate: false,
      validationError: null,
      jobId: "job-1",
      jobStatus: "running",
      failureReason: null,
      storyId: null,
    });
    expect(html).toContain('data-status="running"');
  });
});

describe("story review", () => {
  let stub: StubService;
  let reviewer: StoryReviewer;

  beforeEach(async () => {
    stub = new StubService();
    const client = new ForgeClient("", "family", stub.fetch);
    reviewer = new StoryReviewer(client, await client.getStory("story-fixture"));
  });

  it("a text edit issues a PATCH and shows the stale-image badge", async () => {
    await reviewer.editText("intro", "Alex holds the red fire truck.");
    const patch = stub.requests.find((r) => r.method === "PATCH");
    expect(patch?.path).toBe("/v1/stories/story-fixture/sections/intro");
    expect(reviewer.isStale("intro")).toBe(true);
    const html = renderReviewPage(reviewer.document, (id) => reviewer.isStale(id));
    expect(html).toContain("stale-badge");
  });

  it("regenerating an unedited page issues a single image request", async () => {
    await reviewer.regenerateImage("challenge");
    expect(stub.imageRegenerations).toEqual(["challenge"]);
  });

  it("regeneration clears the stale badge", async () => {
    await reviewer.editText("intro", "Alex holds the red fire truck.");
    expect(reviewer.isStale("intro")).toBe(true);
    await reviewer.regenerateImage("intro");
    expect(reviewer.isStale("intro")).toBe(false);
  });

  it("an identical edit does not mark the image stale", async () => {
    await reviewer.editText("intro", reviewer.sectionText("intro"));
    expect(reviewer.isStale("intro")).toBe(false);
  });
});
