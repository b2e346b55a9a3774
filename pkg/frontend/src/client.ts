// Thin fetch wrapper around the station endpoints. The fetch function is
// injectable so tests can run against a fake or a live service alike.

import {
  ApiErrorBody,
  LatestStatus,
  MissionResponse,
  OutboxEntry,
  ReadingKind,
  ReadingPoint,
  TrackPoint,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiErrorBody,
  ) {
    super(`${body.code}: ${body.detail}`);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class StationClient {
  constructor(
    public readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let body: ApiErrorBody;
      try {
        body = (await response.json()) as ApiErrorBody;
      } catch {
        body = { code: "bad_request", detail: `HTTP ${response.status}` };
      }
      throw new ApiError(response.status, body);
    }
    return (await response.json()) as T;
  }

  vehicles(): Promise<string[]> {
    return this.request("/vehicles");
  }

  track(vehicleId: string, from = 0, to = 2 ** 32): Promise<TrackPoint[]> {
    return this.request(
      `/vehicles/${encodeURIComponent(vehicleId)}/track?from=${from}&to=${to}`,
    );
  }

  latest(vehicleId: string): Promise<LatestStatus> {
    return this.request(`/vehicles/${encodeURIComponent(vehicleId)}/latest`);
  }

  readings(
    vehicleId: string,
    kind: ReadingKind,
    from = 0,
    to = 2 ** 32,
  ): Promise<ReadingPoint[]> {
    return this.request(
      `/vehicles/${encodeURIComponent(vehicleId)}/readings/${kind}?from=${from}&to=${to}`,
    );
  }

  outbox(vehicleId: string): Promise<OutboxEntry[]> {
    return this.request(`/vehicles/${encodeURIComponent(vehicleId)}/outbox`);
  }

  postMission(
    vehicleId: string,
    waypoints: { hour: number; lat: number; lon: number }[],
  ): Promise<MissionResponse> {
    return this.request(`/vehicles/${encodeURIComponent(vehicleId)}/mission`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ waypoints }),
    });
  }
}
