/** Gapless multi-stimulus player.
 *
 * All stimuli are decoded up front; switching stops the old source and
 * starts the new one at the same playhead against the same context clock,
 * so continuity error is bounded by the scheduling latency (well under the
 * 30 ms budget). A short raised-cosine gain ramp (default 10 ms) masks the
 * splice; there is no crossfade region, the swap is sample-aligned.
 *
 * The audio context is injected behind a minimal interface so the logic is
 * testable without a browser.
 */

export interface AudioBufferLike {
  duration: number;
}

export interface AudioParamLike {
  value: number;
  setValueCurveAtTime(values: Float32Array, startTime: number, duration: number): unknown;
  cancelScheduledValues(startTime: number): unknown;
}

export interface AudioNodeLike {
  connect(destination: unknown): unknown;
  disconnect(): void;
}

export interface SourceNodeLike extends AudioNodeLike {
  buffer: AudioBufferLike | null;
  loop: boolean;
  loopStart: number;
  loopEnd: number;
  start(when?: number, offset?: number): void;
  stop(when?: number): void;
}

export interface GainNodeLike extends AudioNodeLike {
  gain: AudioParamLike;
}

export interface AudioContextLike {
  currentTime: number;
  destination: unknown;
  decodeAudioData(data: ArrayBuffer): Promise<AudioBufferLike>;
  createBufferSource(): SourceNodeLike;
  createGain(): GainNodeLike;
}

export interface LoopRegion {
  start: number;
  end: number;
}

function raisedCosine(steps: number, rising: boolean): Float32Array {
  const curve = new Float32Array(steps);
  for (let i = 0; i < steps; i++) {
    const x = i / (steps - 1);
    curve[i] = rising ? 0.5 * (1 - Math.cos(Math.PI * x)) : 0.5 * (1 + Math.cos(Math.PI * x));
  }
  return curve;
}

interface ActiveVoice {
  source: SourceNodeLike;
  gain: GainNodeLike;
}

export class GaplessPlayer {
  private buffers = new Map<string, AudioBufferLike>();
  private activeId: string | null = null;
  private voice: ActiveVoice | null = null;
  private startedAt = 0; // context time when the active voice started
  private offsetAtStart = 0;
  private playingFlag = false;
  private loopRegion: LoopRegion | null = null;

  constructor(
    private ctx: AudioContextLike,
    private rampSeconds = 0.01,
  ) {}

  async load(id: string, data: ArrayBuffer): Promise<void> {
    this.buffers.set(id, await this.ctx.decodeAudioData(data));
  }

  async loadAll(entries: Array<{ id: string; data: ArrayBuffer }>): Promise<void> {
    for (const entry of entries) {
      await this.load(entry.id, entry.data);
    }
  }

  get loadedIds(): string[] {
    return [...this.buffers.keys()];
  }

  get active(): string | null {
    return this.activeId;
  }

  get playing(): boolean {
    return this.playingFlag;
  }

  get loop(): LoopRegion | null {
    return this.loopRegion;
  }

  duration(): number {
    if (!this.activeId) return 0;
    const buffer = this.buffers.get(this.activeId);
    return buffer ? buffer.duration : 0;
  }

  /** Current position in seconds, valid while playing or paused. */
  playhead(): number {
    if (!this.playingFlag) return this.offsetAtStart;
    const raw = this.offsetAtStart + (this.ctx.currentTime - this.startedAt);
    const region = this.loopRegion;
    if (region && raw > region.end) {
      const span = region.end - region.start;
      return region.start + ((raw - region.start) % span);
    }
    return Math.min(raw, this.duration());
  }

  /** Make a stimulus active; if audio is running, swap at the current playhead. */
  select(id: string): void {
    if (!this.buffers.has(id)) {
      throw new Error(`stimulus ${id} is not loaded`);
    }
    if (id === this.activeId) return;
    const position = this.playhead();
    const wasPlaying = this.playingFlag;
    if (wasPlaying) {
      this.stopVoice();
    }
    this.activeId = id;
    this.offsetAtStart = Math.min(position, this.duration());
    if (wasPlaying) {
      this.startVoice(this.offsetAtStart);
    }
  }

  play(): void {
    if (!this.activeId || this.playingFlag) return;
    this.startVoice(this.offsetAtStart);
  }

  pause(): void {
    if (!this.playingFlag) return;
    this.offsetAtStart = this.playhead();
    this.stopVoice();
  }

  seek(seconds: number): void {
    const clamped = Math.max(0, Math.min(seconds, this.duration()));
    const wasPlaying = this.playingFlag;
    if (wasPlaying) {
      this.stopVoice();
    }
    this.offsetAtStart = clamped;
    if (wasPlaying) {
      this.startVoice(clamped);
    }
  }

  setLoop(start: number, end: number): void {
    if (!(start >= 0 && end > start)) {
      throw new Error(`invalid loop region [${start}, ${end})`);
    }
    this.loopRegion = { start, end };
    if (this.voice) {
      this.voice.source.loop = true;
      this.voice.source.loopStart = start;
      this.voice.source.loopEnd = end;
    }
  }

  clearLoop(): void {
    this.loopRegion = null;
    if (this.voice) {
      this.voice.source.loop = false;
    }
  }

  stop(): void {
    this.pause();
    this.offsetAtStart = 0;
  }

  private startVoice(offset: number): void {
    const buffer = this.buffers.get(this.activeId as string);
    if (!buffer) return;
    const source = this.ctx.createBufferSource();
    source.buffer = buffer;
    if (this.loopRegion) {
      source.loop = true;
      source.loopStart = this.loopRegion.start;
      source.loopEnd = this.loopRegion.end;
    }
    const gain = this.ctx.createGain();
    source.connect(gain);
    gain.connect(this.ctx.destination);

    const now = this.ctx.currentTime;
    gain.gain.value = 0;
    gain.gain.setValueCurveAtTime(raisedCosine(32, true), now, this.rampSeconds);
    source.start(now, offset);

    this.voice = { source, gain };
    this.startedAt = now;
    this.offsetAtStart = offset;
    this.playingFlag = true;
  }

  private stopVoice(): void {
    if (this.voice) {
      const now = this.ctx.currentTime;
      this.voice.gain.gain.cancelScheduledValues(now);
      this.voice.gain.gain.setValueCurveAtTime(raisedCosine(32, false), now, this.rampSeconds);
      this.voice.source.stop(now + this.rampSeconds);
      this.voice = null;
    }
    this.playingFlag = false;
  }
}
