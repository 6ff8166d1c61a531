/**
 * DOM bootstrap: one web app, two route trees. ``#/creator`` hosts the
 * profile editor, composer, and review surfaces (desktop-first); ``#/reader``
 * hosts the shelf and the paged reading view (tablet-first). Routing, event
 * wiring, and nothing else: flows live in creator.ts / reader.ts.
 */

import { ForgeClient } from "./api";
import { StoryComposer, StoryReviewer } from "./creator";
import { ReaderSession, startReread } from "./reader";
import { renderComposer, renderReaderPage, renderReviewPage, renderShelf } from "./render";
import type { StoryDocument } from "./types";

const client = new ForgeClient("", "family");
const root = document.getElementById("app") as HTMLElement;

let composer = new StoryComposer(client);
let reviewer: StoryReviewer | null = null;
let reader: ReaderSession | null = null;

function on<K extends keyof HTMLElementEventMap>(
  selector: string,
  type: K,
  handler: (element: HTMLElement, event: HTMLElementEventMap[K]) => void,
): void {
  root.querySelectorAll<HTMLElement>(selector).forEach((element) => {
    element.addEventListener(type, (event) => handler(element, event));
  });
}

async function showCreator(): Promise<void> {
  const profile = await client.getProfile();
  root.innerHTML = renderComposer(profile, composer.state);
  on(".interest", "change", (element) => {
    const input = element as HTMLInputElement;
    const selected = new Set(composer.state.selectedInterests);
    if (input.checked) {
      selected.add(input.value);
    } else {
      selected.delete(input.value);
    }
    composer.state.selectedInterests = [...selected];
  });
  on(".behavior", "input", (element) => {
    composer.state.behavior = (element as HTMLInputElement).value;
  });
  on(".sticker-picker", "change", (element) => {
    composer.state.stickerId = (element as HTMLSelectElement).value;
  });
  on(".composer", "submit", (_element, event) => {
    event.preventDefault();
    void composer.submit(profile).then(async (state) => {
      root.innerHTML = renderComposer(profile, state);
      if (state.storyId) {
        await showReview(state.storyId);
      }
    });
  });
}

async function showReview(storyId: string): Promise<void> {
  const document_ = await client.getStory(storyId);
  reviewer = new StoryReviewer(client, document_);
  const paint = () => {
    root.innerHTML = renderReviewPage(
      (reviewer as StoryReviewer).document,
      (id) => (reviewer as StoryReviewer).isStale(id),
    );
    on(".page-editor", "change", (element) => {
      const section = element.closest(".review-page") as HTMLElement;
      const sectionId = section.dataset.sectionId as string;
      void reviewer?.editText(sectionId, (element as HTMLTextAreaElement).value).then(paint);
    });
    on(".regenerate-image", "click", (element) => {
      const sectionId = element.dataset.sectionId as string;
      void reviewer?.regenerateImage(sectionId).then(paint);
    });
  };
  paint();
}

async function showShelf(): Promise<void> {
  const { stories } = await client.listStories();
  root.innerHTML = renderShelf(stories);
  on(".shelf-card", "click", (element) => {
    void openReader(element.dataset.storyId as string);
  });
}

function paintReader(story: StoryDocument): void {
  if (!reader) {
    return;
  }
  root.innerHTML = renderReaderPage(story, reader.state);
  on(".forward", "click", () => void reader?.turnForward().then(() => paintReader(story)));
  on(".back", "click", () => void reader?.turnBack().then(() => paintReader(story)));
  on(".option-card", "click", (element) => {
    const position = Number(element.dataset.position);
    void reader?.choose(position).then(() => paintReader(story));
  });
  on(".reread", "click", () => {
    void startReread(client, story).then(async (next) => {
      reader = next;
      await reader.start();
      paintReader(story);
    });
  });
  const current = reader.state.currentSectionId;
  if (current === story.paths.ending && !reader.state.rewardOverlay) {
    void reader.complete().then(() => paintReader(story));
  }
}

async function openReader(storyId: string): Promise<void> {
  const story = await client.getStory(storyId);
  const session = await client.startSession(storyId, "reader");
  reader = new ReaderSession(client, story, session);
  await reader.start();
  paintReader(story);
}

function route(): void {
  const hash = window.location.hash || "#/reader";
  if (hash.startsWith("#/creator")) {
    void showCreator();
  } else {
    void showShelf();
  }
}

window.addEventListener("hashchange", route);
window.addEventListener("online", () => void reader?.reconnect());
route();
