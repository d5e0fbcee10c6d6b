/**
 * Stateful controller for one questionnaire session.
 *
 * Holds the current batch of cards with their rating states, the
 * radius history, and the batch token, and owns every service call.
 * DOM-free so it can be unit-tested without a browser.
 */

import { ApiError } from "./api";
import type { ApiClient, Card, RatingValue, SessionSnapshot } from "./api";

/** One state per card; unrated and skipped both submit as NA. */
export type CardRating = "unrated" | "liked" | "disliked" | "skipped";

export interface CardState {
  card: Card;
  rating: CardRating;
}

export type Phase =
  | "idle"
  | "connecting"
  | "rating"
  | "submitting"
  | "done"
  | "error";

const TO_WIRE: Record<CardRating, RatingValue> = {
  unrated: "NA",
  skipped: "NA",
  liked: "+1",
  disliked: "-1",
};

interface RatingsPayload {
  token: number;
  ratings: Record<string, RatingValue>;
}

export class SessionFlow {
  phase: Phase = "idle";
  cards: CardState[] = [];
  recommendations: Card[] = [];
  radiusHistory: number[] = [];
  round = 0;
  errorMessage = "";

  private sessionId = "";
  private token = -1;
  private lastPayload: RatingsPayload | null = null;
  private listeners: Array<() => void> = [];

  constructor(private readonly api: ApiClient) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  async start(): Promise<void> {
    if (this.phase === "connecting") return;
    this.phase = "connecting";
    this.errorMessage = "";
    this.notify();
    try {
      const snapshot = await this.api.createSession();
      this.sessionId = snapshot.session_id ?? "";
      this.applySnapshot(snapshot);
    } catch (err) {
      this.fail(err);
    }
  }

  /** Set the rating state of a card; only current-batch cards exist. */
  rate(cardId: string, rating: CardRating): void {
    const entry = this.cards.find((c) => c.card.id === cardId);
    if (entry === undefined) {
      throw new Error(`card ${cardId} is not in the current batch`);
    }
    entry.rating = rating;
    this.notify();
  }

  /**
   * Submit every card's state (unrated/skipped go out as NA).
   *
   * Only one submission can be in flight: extra calls while submitting
   * are ignored, so a double-click produces one state transition.
   */
  async submit(): Promise<void> {
    if (this.phase !== "rating") return;
    const ratings: Record<string, RatingValue> = {};
    for (const { card, rating } of this.cards) {
      ratings[card.id] = TO_WIRE[rating];
    }
    const payload: RatingsPayload = { token: this.token, ratings };
    this.phase = "submitting";
    this.notify();
    try {
      const snapshot = await this.api.submitRatings(
        this.sessionId,
        payload.token,
        payload.ratings,
      );
      this.lastPayload = payload;
      this.applySnapshot(snapshot);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409 && this.lastPayload) {
        await this.resync();
      } else {
        this.fail(err);
      }
    }
  }

  /**
   * Recover from a stale batch token (e.g. a retried submit already
   * landed): re-sending the last accepted payload hits the service's
   * idempotent replay cache, whose response carries the current
   * outstanding batch.
   */
  private async resync(): Promise<void> {
    const last = this.lastPayload;
    if (last === null) return;
    try {
      const snapshot = await this.api.submitRatings(
        this.sessionId,
        last.token,
        last.ratings,
      );
      this.applySnapshot(snapshot);
    } catch (err) {
      this.fail(err);
    }
  }

  private applySnapshot(snapshot: SessionSnapshot): void {
    const radius = snapshot.region?.radius;
    if (radius !== null && radius !== undefined) {
      this.radiusHistory.push(radius);
      this.round = snapshot.region?.round ?? this.round;
    }
    if (snapshot.state === "done") {
      this.cards = [];
      this.recommendations = snapshot.recommendations ?? [];
      this.phase = "done";
    } else if (snapshot.batch !== null) {
      this.token = snapshot.batch.token;
      this.cards = snapshot.batch.items.map((card) => ({
        card,
        rating: "unrated" as CardRating,
      }));
      this.phase = "rating";
    }
    this.notify();
  }

  private fail(err: unknown): void {
    this.phase = "error";
    this.errorMessage =
      err instanceof ApiError ? err.message : "cannot reach the service";
    this.notify();
  }
}
