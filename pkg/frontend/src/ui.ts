/**
 * DOM view for the questionnaire: a scrollable card list with
 * like/dislike/skip buttons, a shrinking radius bar, and the final
 * recommendation list.  The whole view re-renders on every controller
 * change; the DOM is small enough that diffing would be overkill.
 */

import type { SessionFlow, CardRating, CardState } from "./session";

const RATING_BUTTONS: Array<{ rating: CardRating; label: string }> = [
  { rating: "liked", label: "Like" },
  { rating: "disliked", label: "Dislike" },
  { rating: "skipped", label: "Skip" },
];

const FULL_RADIUS = 0.5;

export function mount(root: HTMLElement, flow: SessionFlow): void {
  flow.onChange(() => render(root, flow));
  render(root, flow);
}

export function render(root: HTMLElement, flow: SessionFlow): void {
  root.textContent = "";
  root.append(header(flow), radiusBar(flow));
  switch (flow.phase) {
    case "idle":
      root.append(status("Ready."));
      break;
    case "connecting":
      root.append(status("Connecting…"));
      break;
    case "error":
      root.append(errorBanner(flow));
      break;
    case "rating":
    case "submitting":
      root.append(cardList(flow), submitButton(flow));
      break;
    case "done":
      root.append(recommendationList(flow));
      break;
  }
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function header(flow: SessionFlow): HTMLElement {
  const node = el("header");
  node.append(el("h1", "", "Find your taste"));
  const round = el("span", "round", `round ${flow.round}`);
  round.dataset.testid = "round";
  node.append(round);
  return node;
}

function status(message: string): HTMLElement {
  const node = el("p", "status", message);
  node.dataset.testid = "status";
  return node;
}

/** One bar segment per solved region, width proportional to radius. */
function radiusBar(flow: SessionFlow): HTMLElement {
  const bar = el("div", "radius-bar");
  bar.dataset.testid = "radius-bar";
  for (const radius of flow.radiusHistory) {
    const step = el("span", "radius-step");
    step.dataset.testid = "radius-step";
    step.dataset.radius = String(radius);
    step.style.width = `${(100 * radius) / FULL_RADIUS}%`;
    step.title = radius.toFixed(4);
    bar.append(step);
  }
  return bar;
}

function cardRow(flow: SessionFlow, state: CardState): HTMLElement {
  const row = el("li", "card");
  row.dataset.testid = "card";
  row.dataset.itemId = state.card.id;
  row.dataset.rating = state.rating;
  row.append(el("span", "card-name", state.card.name));
  for (const { rating, label } of RATING_BUTTONS) {
    const button = el("button", "rate", label);
    button.type = "button";
    button.dataset.rating = rating;
    if (state.rating === rating) button.classList.add("active");
    button.addEventListener("click", () => flow.rate(state.card.id, rating));
    row.append(button);
  }
  return row;
}

function cardList(flow: SessionFlow): HTMLElement {
  const list = el("ul", "cards");
  list.dataset.testid = "cards";
  for (const state of flow.cards) list.append(cardRow(flow, state));
  return list;
}

function submitButton(flow: SessionFlow): HTMLElement {
  const button = el("button", "submit", "Submit ratings");
  button.type = "button";
  button.dataset.testid = "submit";
  button.disabled = flow.phase === "submitting";
  button.addEventListener("click", () => void flow.submit());
  return button;
}

function recommendationList(flow: SessionFlow): HTMLElement {
  const wrap = el("section", "recommendations-wrap");
  wrap.append(el("h2", "", "Your recommendations"));
  const list = el("ol", "recommendations");
  list.dataset.testid = "recommendations";
  for (const card of flow.recommendations) {
    const item = el("li", "recommendation", card.name);
    item.dataset.itemId = card.id;
    list.append(item);
  }
  wrap.append(list);
  return wrap;
}

function errorBanner(flow: SessionFlow): HTMLElement {
  const banner = el("div", "banner");
  banner.dataset.testid = "banner";
  banner.append(el("span", "", flow.errorMessage || "Something went wrong."));
  const retry = el("button", "retry", "Retry");
  retry.type = "button";
  retry.dataset.testid = "retry";
  retry.addEventListener("click", () => void flow.start());
  banner.append(retry);
  return banner;
}
