import assert from "node:assert/strict";
import test from "node:test";

import { DraftRow } from "../types.js";
import { MAX_WAYPOINTS, validateDraft } from "../validation.js";

function rows(n: number): DraftRow[] {
  return Array.from({ length: n }, (_, i) => ({
    hour: i,
    lat: 59.9,
    lon: 10.7,
  }));
}

test("valid draft passes", () => {
  const check = validateDraft(rows(3));
  assert.equal(check.ok, true);
  assert.equal(check.formError, null);
  assert.equal(check.rowErrors.size, 0);
});

test("empty draft blocked", () => {
  const check = validateDraft([]);
  assert.equal(check.ok, false);
  assert.match(check.formError ?? "", /at least one/);
});

test("26 rows block submission with a count error", () => {
  const check = validateDraft(rows(26));
  assert.equal(check.ok, false);
  assert.match(check.formError ?? "", /26 waypoints exceed the 25/);
  assert.ok(check.rowErrors.has(MAX_WAYPOINTS));
});

test("25 rows are accepted", () => {
  assert.equal(validateDraft(rows(25)).ok, true);
});

test("unsorted hours flag the offending row", () => {
  const draft = rows(3);
  draft[2].hour = 1; // equal to row 1's hour: not strictly increasing
  const check = validateDraft(draft);
  assert.equal(check.ok, false);
  assert.match(check.rowErrors.get(2) ?? "", /strictly increasing/);
  assert.equal(check.rowErrors.has(1), false);
});

test("incomplete and out-of-range rows are labelled", () => {
  const check = validateDraft([
    { hour: 0, lat: null, lon: 10.0 },
    { hour: 1, lat: 95.0, lon: 10.0 },
    { hour: 2, lat: 59.0, lon: 190.0 },
    { hour: 2.5, lat: 59.0, lon: 10.0 },
  ]);
  assert.equal(check.ok, false);
  assert.match(check.rowErrors.get(0) ?? "", /incomplete/);
  assert.match(check.rowErrors.get(1) ?? "", /latitude/);
  assert.match(check.rowErrors.get(2) ?? "", /longitude/);
  assert.match(check.rowErrors.get(3) ?? "", /integer/);
});
