export interface PollHandle {
  stop(): void;
}

/**
 * Run `tick` immediately and then every `intervalMs`. A rejected tick calls
 * `onError` and polling continues; the first success afterwards calls
 * `onRecover`. Overlapping runs are skipped rather than queued: if a tick is
 * still in flight when the timer fires, that cycle is dropped.
 */
export function startPoll(
  tick: () => Promise<void>,
  intervalMs: number,
  onError: (err: unknown) => void,
  onRecover?: () => void,
): PollHandle {
  let stopped = false;
  let inFlight = false;
  let failing = false;

  const run = async () => {
    if (inFlight || stopped) return;
    inFlight = true;
    try {
      await tick();
      if (failing && !stopped) {
        failing = false;
        onRecover?.();
      }
    } catch (err) {
      failing = true;
      if (!stopped) onError(err);
    } finally {
      inFlight = false;
    }
  };

  void run();
  const timer = setInterval(run, intervalMs);
  return {
    stop() {
      stopped = true;
      clearInterval(timer);
    },
  };
}
