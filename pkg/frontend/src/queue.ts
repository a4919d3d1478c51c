/**
 * Serializer for synthesis requests: at most one render runs at a time, and
 * edits made during a render collapse into a single trailing run. Submitting
 * while a trailing job is already parked replaces it, so dragging the slider
 * fires the last position once instead of one render per tick.
 */

export type Job = () => Promise<void>;

export class RenderQueue {
  private active = false;
  private trailing: Job | null = null;

  get busy(): boolean {
    return this.active;
  }

  submit(job: Job): void {
    if (this.active) {
      this.trailing = job;
      return;
    }
    void this.run(job);
  }

  private async run(job: Job): Promise<void> {
    this.active = true;
    try {
      await job();
    } catch {
      // the job owns its error reporting; the queue just keeps moving
    }
    this.active = false;
    const next = this.trailing;
    this.trailing = null;
    if (next) void this.run(next);
  }
}
