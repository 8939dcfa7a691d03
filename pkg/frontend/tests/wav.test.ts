import { describe, expect, it } from "vitest";

import { captureToWav, encodeWav, floatTo16BitPcm, resampleLinear } from "../src/wav.js";

function view(buffer: ArrayBuffer): DataView {
  return new DataView(buffer);
}

function ascii(buffer: ArrayBuffer, offset: number, length: number): string {
  return new TextDecoder().decode(new Uint8Array(buffer, offset, length));
}

describe("encodeWav", () => {
  it("emits the canonical header for one second of audio", () => {
    const wav = encodeWav(new Int16Array(16000));
    const v = view(wav);
    expect(ascii(wav, 0, 4)).toBe("RIFF");
    expect(v.getUint32(4, true)).toBe(36 + 32000);
    expect(ascii(wav, 8, 4)).toBe("WAVE");
    expect(ascii(wav, 12, 4)).toBe("fmt ");
    expect(v.getUint32(16, true)).toBe(16);
    expect(v.getUint16(20, true)).toBe(1); // PCM
    expect(v.getUint16(22, true)).toBe(1); // mono
    expect(v.getUint32(24, true)).toBe(16000);
    expect(v.getUint32(28, true)).toBe(32000);
    expect(v.getUint16(32, true)).toBe(2);
    expect(v.getUint16(34, true)).toBe(16);
    expect(ascii(wav, 36, 4)).toBe("data");
    expect(v.getUint32(40, true)).toBe(32000);
    expect(wav.byteLength).toBe(44 + 32000);
  });

  it("stores little-endian samples after the header", () => {
    const samples = new Int16Array([0, 1000, -1000, 32767, -32768]);
    const wav = encodeWav(samples);
    const v = view(wav);
    for (let i = 0; i < samples.length; i++) {
      expect(v.getInt16(44 + 2 * i, true)).toBe(samples[i]);
    }
  });
});

describe("floatTo16BitPcm", () => {
  it("clamps out-of-range floats", () => {
    const pcm = floatTo16BitPcm(new Float32Array([2.0, -2.0, 0.0, 1.0, -1.0]));
    expect(Array.from(pcm)).toEqual([32767, -32767, 0, 32767, -32767]);
  });
});

describe("resampleLinear", () => {
  it("passes through at matching rates", () => {
    const input = new Float32Array([0.1, 0.5, -0.2]);
    expect(resampleLinear(input, 16000, 16000)).toBe(input);
  });

  it("halves sample count from 32 kHz", () => {
    const input = new Float32Array(3200).fill(0.25);
    const out = resampleLinear(input, 32000);
    expect(out.length).toBe(1600);
    expect(out[0]).toBeCloseTo(0.25, 6);
    expect(out[out.length - 1]).toBeCloseTo(0.25, 6);
  });

  it("interpolates between neighbours", () => {
    const out = resampleLinear(new Float32Array([0, 1]), 32000);
    // two input samples at 32 kHz become one at 16 kHz, taking the start
    expect(out.length).toBe(1);
    expect(out[0]).toBeCloseTo(0, 6);
  });
});

describe("captureToWav", () => {
  it("joins chunks and resamples from the capture rate", () => {
    const chunkA = new Float32Array(24000).fill(0.5);
    const chunkB = new Float32Array(24000).fill(0.5);
    const wav = captureToWav([chunkA, chunkB], 48000);
    const v = view(wav);
    expect(v.getUint32(40, true)).toBe(16000 * 2); // one second at 16 kHz
    expect(v.getInt16(44, true)).toBe(Math.round(0.5 * 32767));
  });
});
