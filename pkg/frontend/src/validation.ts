// Client-side mirror of the station's mission validation. The station stays
// the authority; this only gates the submit button and labels bad rows.

import { DraftRow } from "./types.js";

export const MAX_WAYPOINTS = 25;

export interface DraftCheck {
  ok: boolean;
  formError: string | null;
  rowErrors: Map<number, string>;
}

export function validateDraft(rows: DraftRow[]): DraftCheck {
  const rowErrors = new Map<number, string>();
  let formError: string | null = null;

  if (rows.length === 0) {
    formError = "mission needs at least one waypoint";
  } else if (rows.length > MAX_WAYPOINTS) {
    formError = `${rows.length} waypoints exceed the ${MAX_WAYPOINTS}-waypoint command limit`;
    rowErrors.set(MAX_WAYPOINTS, "first row beyond the command limit");
  }

  let prevHour: number | null = null;
  rows.forEach((row, i) => {
    if (row.hour === null || row.lat === null || row.lon === null) {
      rowErrors.set(i, "incomplete row");
      return;
    }
    if (!Number.isInteger(row.hour) || row.hour < 0) {
      rowErrors.set(i, "hour must be a non-negative integer");
      return;
    }
    if (row.lat < -90 || row.lat > 90) {
      rowErrors.set(i, "latitude out of range");
      return;
    }
    if (row.lon < -180 || row.lon > 180) {
      rowErrors.set(i, "longitude out of range");
      return;
    }
    if (prevHour !== null && row.hour <= prevHour) {
      rowErrors.set(i, "hours must be strictly increasing");
      return;
    }
    prevHour = row.hour;
  });

  return { ok: formError === null && rowErrors.size === 0, formError, rowErrors };
}
