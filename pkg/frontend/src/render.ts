/**
 * Pure HTML renderers for both route trees. Keeping these as string
 * functions (no DOM reads) makes every view testable in node and keeps
 * app.ts down to event wiring.
 */

import type { ComposerState } from "./creator";
import type { ReaderViewState } from "./reader";
import type { OptionCard, Profile, StoryDocument, StoryListItem } from "./types";

function escapeHtml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderShelf(stories: StoryListItem[]): string {
  if (stories.length === 0) {
    return `<p class="empty">No stories yet. Create one in the Creator.</p>`;
  }
  const cards = stories
    .map(
      (story) => `
    <button class="shelf-card" data-story-id="${escapeHtml(story.id)}">
      <span class="shelf-title">${escapeHtml(story.title)}</span>
      <span class="shelf-topic">${escapeHtml(story.topic_type)}</span>
    </button>`,
    )
    .join("\n");
  return `<div class="shelf">${cards}</div>`;
}

export function renderOptionCards(cards: OptionCard[]): string {
  // Server presentation order is authoritative; render as given.
  const rendered = cards
    .map(
      (card) => `
    <button class="option-card" data-position="${card.position}"
            data-section-id="${escapeHtml(card.section_id)}">
      ${escapeHtml(card.text)}
    </button>`,
    )
    .join("\n");
  return `<div class="option-cards">${rendered}</div>`;
}

export function renderReaderPage(story: StoryDocument, state: ReaderViewState): string {
  if (!state.currentSectionId) {
    return `<p class="empty">Opening the story...</p>`;
  }
  const section = story.sections.find((s) => s.id === state.currentSectionId);
  if (!section) {
    return `<p class="error">Page missing.</p>`;
  }
  const image = section.illustration
    ? `<div class="page-art" data-image-ref="${escapeHtml(section.illustration)}"></div>`
    : "";
  const options = state.pendingOptions ? renderOptionCards(state.pendingOptions) : "";
  const reward = state.rewardOverlay
    ? `<div class="reward-overlay" data-sticker-kind="${state.rewardOverlay.sticker.kind}">
         <p class="reward-label">${escapeHtml(state.rewardOverlay.sticker.label)}</p>
         ${state.rereadPrompt ? `<button class="reread">Let's see the other path, too</button>` : ""}
       </div>`
    : "";
  const error = state.lastError ? `<p class="error">${escapeHtml(state.lastError)}</p>` : "";
  const offline = state.offline ? `<p class="offline-banner">Offline: saving your reading</p>` : "";
  return `
  <article class="reader-page" data-section-id="${escapeHtml(section.id)}">
    ${offline}
    ${image}
    <p class="page-text">${escapeHtml(section.text)}</p>
    ${options}
    ${reward}
    ${error}
    <nav class="pager">
      <button class="back">Back</button>
      <button class="forward">Next</button>
    </nav>
  </article>`;
}

export function renderComposer(profile: Profile, state: ComposerState): string {
  const interests = profile.entities
    .filter((entity) => entity.kind === "interest")
    .map((entity) => {
      const checked = state.selectedInterests.includes(entity.name) ? "checked" : "";
      return `<label><input type="checkbox" class="interest" value="${escapeHtml(entity.name)}" ${checked}> ${escapeHtml(entity.name)}</label>`;
    })
    .join("\n");
  const stickers = profile.stickers
    .map((sticker) => {
      const selected = state.stickerId === sticker.id ? "selected" : "";
      return `<option value="${escapeHtml(sticker.id)}" ${selected}>${escapeHtml(sticker.label)}</option>`;
    })
    .join("\n");
  const error = state.validationError
    ? `<p class="inline-error">${escapeHtml(state.validationError)}</p>`
    : "";
  const progress = state.jobStatus
    ? `<p class="job-progress" data-status="${state.jobStatus}">generation: ${state.jobStatus}${
        state.failureReason ? ` (${escapeHtml(state.failureReason)})` : ""
      }</p>`
    : "";
  return `
  <form class="composer">
    <fieldset class="interest-picker">${interests}</fieldset>
    <input class="behavior" placeholder="Behavior to encourage"
           value="${escapeHtml(state.behavior)}">
    <select class="sticker-picker">${stickers}</select>
    <button class="create" type="submit">Create story</button>
    ${error}
    ${progress}
  </form>`;
}

export function renderReviewPage(
  document: StoryDocument,
  staleSectionIds: (id: string) => boolean,
): string {
  const pages = document.sections
    .map((section) => {
      const badge = staleSectionIds(section.id)
        ? `<span class="stale-badge">image out of date</span>`
        : "";
      return `
    <section class="review-page" data-section-id="${escapeHtml(section.id)}">
      <textarea class="page-editor">${escapeHtml(section.text)}</textarea>
      ${badge}
      <button class="regenerate-image" data-section-id="${escapeHtml(section.id)}">
        Regenerate page image
      </button>
    </section>`;
    })
    .join("\n");
  return `<div class="review">${pages}</div>`;
}
