import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { startPoll } from "../src/poll.js";

beforeEach(() => {
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

describe("startPoll", () => {
  it("ticks immediately and then on the interval", async () => {
    const tick = vi.fn().mockResolvedValue(undefined);
    const handle = startPoll(tick, 5000, () => {});
    await vi.advanceTimersByTimeAsync(0);
    expect(tick).toHaveBeenCalledTimes(1);
    await vi.advanceTimersByTimeAsync(10_000);
    expect(tick).toHaveBeenCalledTimes(3);
    handle.stop();
  });

  it("reports errors, keeps polling, and signals recovery once", async () => {
    const tick = vi
      .fn()
      .mockRejectedValueOnce(new Error("down"))
      .mockResolvedValue(undefined);
    const onError = vi.fn();
    const onRecover = vi.fn();
    const handle = startPoll(tick, 1000, onError, onRecover);
    await vi.advanceTimersByTimeAsync(0);
    expect(onError).toHaveBeenCalledTimes(1);
    await vi.advanceTimersByTimeAsync(2500);
    expect(tick).toHaveBeenCalledTimes(3);
    expect(onRecover).toHaveBeenCalledTimes(1);
    handle.stop();
  });

  it("skips cycles while a tick is still in flight", async () => {
    let release: () => void = () => {};
    const tick = vi.fn(
      () => new Promise<void>((resolve) => (release = resolve)),
    );
    const handle = startPoll(tick, 1000, () => {});
    await vi.advanceTimersByTimeAsync(3500);
    expect(tick).toHaveBeenCalledTimes(1);
    release();
    await vi.advanceTimersByTimeAsync(1000);
    expect(tick).toHaveBeenCalledTimes(2);
    handle.stop();
  });

  it("stops cleanly", async () => {
    const tick = vi.fn().mockResolvedValue(undefined);
    const handle = startPoll(tick, 1000, () => {});
    await vi.advanceTimersByTimeAsync(0);
    handle.stop();
    await vi.advanceTimersByTimeAsync(5000);
    expect(tick).toHaveBeenCalledTimes(1);
  });
});
