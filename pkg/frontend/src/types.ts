// Response shapes of the ground-station HTTP API. Field names and units
// mirror the service exactly; the console never reshapes values.

export interface TrackPoint {
  t: number;
  lat: number;
  lon: number;
  heading_deg: number;
  speed_m_s: number;
}

export interface ReadingPoint {
  t: number;
  value: number;
}

export interface StatusFlags {
  capsized: boolean;
  thruster_on: boolean;
  on_backup: boolean;
  load_shed: boolean;
}

export interface LatestStatus {
  vehicle_id: string;
  seq: number;
  t: number;
  lat: number;
  lon: number;
  heading_deg: number;
  speed_m_s: number;
  soc: number;
  readings: Record<string, number>;
  flags: StatusFlags;
}

export interface MissionResponse {
  vehicle_id: string;
  version: number;
}

export interface OutboxEntry {
  command_id: number;
  vehicle_id: string;
  version: number;
  status: "queued" | "sent" | "acked" | "failed_validation";
  t_queued: number;
  t_sent: number | null;
  t_acked: number | null;
}

export interface ApiErrorBody {
  code: "bad_request" | "not_found" | "conflict" | "payload_too_large";
  detail: string;
}

export interface DraftRow {
  hour: number | null;
  lat: number | null;
  lon: number | null;
}

export const READING_KINDS = [
  "conductivity",
  "temperature",
  "dissolved_oxygen",
  "ph",
] as const;
export type ReadingKind = (typeof READING_KINDS)[number];
