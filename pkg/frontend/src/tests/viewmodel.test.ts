import assert from "node:assert/strict";
import test from "node:test";

import { StationClient } from "../client.js";
import { LatestStatus, OutboxEntry, TrackPoint } from "../types.js";
import { ConsoleViewModel, pollOnce } from "../viewmodel.js";

function fakeResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function makeLatest(capsized = false): LatestStatus {
  return {
    vehicle_id: "usv-1",
    seq: 4,
    t: 2400,
    lat: 59.9123456,
    lon: 10.7654321,
    heading_deg: 42.42,
    speed_m_s: 0.512,
    soc: 0.87,
    readings: { temperature: 12.34, ph: 8.054, conductivity: 50321, dissolved_oxygen: 8.12 },
    flags: { capsized, thruster_on: false, on_backup: false, load_shed: false },
  };
}

function clientWith(routes: Record<string, unknown>, posts: unknown[] = []): StationClient {
  return new StationClient("http://station", async (url, init) => {
    const path = url.replace("http://station", "");
    if (init?.method === "POST") {
      posts.push(JSON.parse(String(init.body)));
      const route = routes[`POST ${path}`];
      if (route instanceof Response) return route;
      return fakeResponse(200, route ?? { vehicle_id: "usv-1", version: 1 });
    }
    for (const [key, body] of Object.entries(routes)) {
      if (path.startsWith(key)) return fakeResponse(200, body);
    }
    return fakeResponse(404, { code: "not_found", detail: "no route" });
  });
}

const track: TrackPoint[] = [
  { t: 600, lat: 59.91, lon: 10.75, heading_deg: 0, speed_m_s: 0.3 },
  { t: 1200, lat: 59.9101, lon: 10.7501, heading_deg: 10, speed_m_s: 0.31 },
  { t: 1800, lat: 59.9102, lon: 10.7503, heading_deg: 20, speed_m_s: 0.32 },
];

test("poll applies track in time order and marks data fresh", async () => {
  const client = clientWith({
    "/vehicles/usv-1/track": track,
    "/vehicles/usv-1/latest": makeLatest(),
    "/vehicles/usv-1/outbox": [],
    "/vehicles/usv-1/readings/": [],
  });
  const vm = new ConsoleViewModel("usv-1");
  vm.applyPoll(await pollOnce(client, "usv-1", () => 1234));
  assert.equal(vm.track.length, 3);
  assert.deepEqual(
    vm.track.map((p) => p.t),
    [600, 1200, 1800],
  );
  assert.equal(vm.offline, false);
  assert.equal(vm.lastPollAt, 1234);
  assert.equal(vm.hasData, true);
});

test("latest status is held verbatim (no re-rounding)", async () => {
  const latest = makeLatest();
  const client = clientWith({
    "/vehicles/usv-1/track": [],
    "/vehicles/usv-1/latest": latest,
    "/vehicles/usv-1/outbox": [],
    "/vehicles/usv-1/readings/": [],
  });
  const vm = new ConsoleViewModel("usv-1");
  vm.applyPoll(await pollOnce(client, "usv-1"));
  assert.deepEqual(vm.latest, latest);
  assert.equal(JSON.stringify(vm.latest), JSON.stringify(latest));
});

test("capsized flag raises the alert", async () => {
  const vm = new ConsoleViewModel("usv-1");
  assert.equal(vm.capsizeAlert, false);
  const client = clientWith({
    "/vehicles/usv-1/track": track,
    "/vehicles/usv-1/latest": makeLatest(true),
    "/vehicles/usv-1/outbox": [],
    "/vehicles/usv-1/readings/": [],
  });
  vm.applyPoll(await pollOnce(client, "usv-1"));
  assert.equal(vm.capsizeAlert, true);
});

test("unreachable station marks offline but keeps last data", async () => {
  const vm = new ConsoleViewModel("usv-1");
  const good = clientWith({
    "/vehicles/usv-1/track": track,
    "/vehicles/usv-1/latest": makeLatest(),
    "/vehicles/usv-1/outbox": [],
    "/vehicles/usv-1/readings/": [],
  });
  vm.applyPoll(await pollOnce(good, "usv-1"));
  const failing = new StationClient("http://station", async () => {
    throw new Error("connection refused");
  });
  await assert.rejects(pollOnce(failing, "usv-1"));
  vm.markOffline();
  assert.equal(vm.offline, true);
  assert.equal(vm.track.length, 3); // retained
});

test("fresh vehicle (404s) is the no-data state, not an outage", async () => {
  const client = clientWith({ "/vehicles/usv-1/outbox": [] });
  const vm = new ConsoleViewModel("usv-1");
  vm.applyPoll(await pollOnce(client, "usv-1"));
  assert.equal(vm.hasData, false);
  assert.equal(vm.offline, false);
});

test("draft gating mirrors the station rules", () => {
  const vm = new ConsoleViewModel("usv-1");
  vm.draft = Array.from({ length: 26 }, (_, i) => ({
    hour: i,
    lat: 59.9,
    lon: 10.7,
  }));
  assert.equal(vm.canSubmit, false);
  vm.draft = vm.draft.slice(0, 3);
  assert.equal(vm.canSubmit, true);
});

test("submit posts once, records the version, blocks reentry", async () => {
  const posts: unknown[] = [];
  const client = clientWith(
    { "POST /vehicles/usv-1/mission": { vehicle_id: "usv-1", version: 7 } },
    posts,
  );
  const vm = new ConsoleViewModel("usv-1");
  vm.draft = [
    { hour: 0, lat: 59.91, lon: 10.75 },
    { hour: 1, lat: 59.92, lon: 10.76 },
  ];
  const first = vm.submitMission(client);
  assert.equal(vm.submitInFlight, true);
  assert.equal(vm.canSubmit, false); // single in-flight request
  const second = vm.submitMission(client); // rejected immediately
  assert.deepEqual([await first, await second], [true, false]);
  assert.equal(posts.length, 1);
  assert.deepEqual(posts[0], {
    waypoints: [
      { hour: 0, lat: 59.91, lon: 10.75 },
      { hour: 1, lat: 59.92, lon: 10.76 },
    ],
  });
  assert.equal(vm.lastPostedVersion, 7);
});

test("server payload_too_large surfaces as the submit error", async () => {
  const client = new StationClient("http://station", async () =>
    fakeResponse(413, { code: "payload_too_large", detail: "too many waypoints" }),
  );
  const vm = new ConsoleViewModel("usv-1");
  vm.draft = [{ hour: 0, lat: 59.9, lon: 10.7 }];
  assert.equal(await vm.submitMission(client), false);
  assert.match(vm.submitError ?? "", /payload_too_large/);
});

test("outbox entry for the posted version is surfaced", async () => {
  const vm = new ConsoleViewModel("usv-1");
  vm.lastPostedVersion = 2;
  const outbox: OutboxEntry[] = [
    { command_id: 1, vehicle_id: "usv-1", version: 1, status: "acked",
      t_queued: 1, t_sent: 2, t_acked: 3 },
    { command_id: 2, vehicle_id: "usv-1", version: 2, status: "sent",
      t_queued: 5, t_sent: 6, t_acked: null },
  ];
  vm.applyPoll({ track: [], latest: null, readings: {}, outbox, receivedAt: 0 });
  assert.equal(vm.lastPostedEntry?.status, "sent");
});
