// Console state: everything the page shows, derived solely from the station
// API responses. Poll results are applied verbatim (no re-rounding, so the
// displayed values stay byte-for-byte what the service reported); draft
// editing and submission gating live here so they are testable without a DOM.

import { ApiError, StationClient } from "./client.js";
import {
  DraftRow,
  LatestStatus,
  OutboxEntry,
  ReadingKind,
  ReadingPoint,
  TrackPoint,
} from "./types.js";
import { DraftCheck, validateDraft } from "./validation.js";

export interface PollResult {
  track: TrackPoint[];
  latest: LatestStatus | null;
  readings: Partial<Record<ReadingKind, ReadingPoint[]>>;
  outbox: OutboxEntry[];
  receivedAt: number;
}

export class ConsoleViewModel {
  vehicleId: string;
  track: TrackPoint[] = [];
  latest: LatestStatus | null = null;
  readings: Partial<Record<ReadingKind, ReadingPoint[]>> = {};
  outbox: OutboxEntry[] = [];

  offline = false;
  lastPollAt: number | null = null;

  draft: DraftRow[] = [{ hour: 0, lat: null, lon: null }];
  submitInFlight = false;
  lastPostedVersion: number | null = null;
  submitError: string | null = null;

  constructor(vehicleId: string) {
    this.vehicleId = vehicleId;
  }

  // -- polling ----------------------------------------------------------------

  applyPoll(result: PollResult): void {
    this.track = result.track;
    this.latest = result.latest;
    for (const [kind, points] of Object.entries(result.readings)) {
      this.readings[kind as ReadingKind] = points;
    }
    this.outbox = result.outbox;
    this.offline = false;
    this.lastPollAt = result.receivedAt;
  }

  markOffline(): void {
    // Last data is retained; the banner plus the stale timestamp tell the
    // operator what they are looking at.
    this.offline = true;
  }

  get hasData(): boolean {
    return this.track.length > 0 || this.latest !== null;
  }

  get capsizeAlert(): boolean {
    return this.latest?.flags.capsized ?? false;
  }

  get staleSeconds(): number | null {
    if (this.lastPollAt === null) return null;
    return (Date.now() - this.lastPollAt) / 1000;
  }

  // -- mission draft ------------------------------------------------------------

  get draftCheck(): DraftCheck {
    return validateDraft(this.draft);
  }

  get canSubmit(): boolean {
    return this.draftCheck.ok && !this.submitInFlight;
  }

  addDraftRow(): void {
    const last = this.draft[this.draft.length - 1];
    const nextHour = last && last.hour !== null ? last.hour + 1 : 0;
    this.draft.push({ hour: nextHour, lat: null, lon: null });
  }

  removeDraftRow(index: number): void {
    this.draft.splice(index, 1);
  }

  updateDraftRow(index: number, patch: Partial<DraftRow>): void {
    const row = this.draft[index];
    if (row) Object.assign(row, patch);
  }

  async submitMission(client: StationClient): Promise<boolean> {
    if (!this.canSubmit) return false;
    this.submitInFlight = true;
    this.submitError = null;
    try {
      const waypoints = this.draft.map((row) => ({
        hour: row.hour as number,
        lat: row.lat as number,
        lon: row.lon as number,
      }));
      const response = await client.postMission(this.vehicleId, waypoints);
      this.lastPostedVersion = response.version;
      return true;
    } catch (err) {
      this.submitError =
        err instanceof ApiError ? `${err.body.code}: ${err.body.detail}` : String(err);
      return false;
    } finally {
      this.submitInFlight = false;
    }
  }

  // Outbox row for the mission the operator last posted, if visible yet.
  get lastPostedEntry(): OutboxEntry | null {
    if (this.lastPostedVersion === null) return null;
    return (
      this.outbox.find((e) => e.version === this.lastPostedVersion) ?? null
    );
  }
}

async function or404<T>(promise: Promise<T>, fallback: T): Promise<T> {
  try {
    return await promise;
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) return fallback;
    throw err;
  }
}

export async function pollOnce(
  client: StationClient,
  vehicleId: string,
  now: () => number = Date.now,
): Promise<PollResult> {
  // A vehicle with no telemetry yet 404s on the data endpoints; that is the
  // console's "no data" state, not an outage.
  const [track, latest, outbox, temperature, ph, conductivity, oxygen] =
    await Promise.all([
      or404(client.track(vehicleId), []),
      or404<LatestStatus | null>(client.latest(vehicleId), null),
      client.outbox(vehicleId),
      or404(client.readings(vehicleId, "temperature"), []),
      or404(client.readings(vehicleId, "ph"), []),
      or404(client.readings(vehicleId, "conductivity"), []),
      or404(client.readings(vehicleId, "dissolved_oxygen"), []),
    ]);
  return {
    track,
    latest,
    outbox,
    readings: {
      temperature,
      ph,
      conductivity,
      dissolved_oxygen: oxygen,
    },
    receivedAt: now(),
  };
}
