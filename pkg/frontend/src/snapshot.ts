/**
 * Parser for beqt2d field snapshots.
 *
 * Layout (version 1): a 64-byte NUL-padded ASCII header
 * `BEQT2D\n<version> <n> <t>\n` followed by four n*n float64
 * little-endian row-major arrays in order u1, u2, p, q.
 */

const MAGIC = 'BEQT2D\n';
const HEADER_SIZE = 64;
const VERSION = 1;

export interface Snapshot {
  n: number;
  t: number;
  u1: Float64Array;
  u2: Float64Array;
  p: Float64Array;
  q: Float64Array;
}

export class SnapshotFormatError extends Error {}

function isLittleEndian(): boolean {
  const probe = new Uint8Array(new Float64Array([1.0]).buffer);
  return probe[7] === 0x3f;
}

function readFloat64Block(data: Uint8Array, offset: number, count: number): Float64Array {
  // explicit copy into a fresh allocation: node Buffers share a pool, so
  // their .buffer/.byteOffset cannot be handed to Float64Array directly
  const bytes = new Uint8Array(count * 8);
  bytes.set(data.subarray(offset, offset + count * 8));
  if (isLittleEndian()) {
    return new Float64Array(bytes.buffer, 0, count);
  }
  const view = new DataView(bytes.buffer);
  const out = new Float64Array(count);
  for (let i = 0; i < count; ++i) {
    out[i] = view.getFloat64(i * 8, /* littleEndian= */ true);
  }
  return out;
}

export function parseSnapshot(data: Uint8Array): Snapshot {
  if (data.length < HEADER_SIZE) {
    throw new SnapshotFormatError(`snapshot too short: ${data.length} bytes`);
  }
  for (let i = 0; i < MAGIC.length; ++i) {
    if (data[i] !== MAGIC.charCodeAt(i)) {
      throw new SnapshotFormatError('bad magic: not a BEQT2D snapshot');
    }
  }
  let header = '';
  for (let i = MAGIC.length; i < HEADER_SIZE; ++i) {
    if (data[i] === 0) break;
    header += String.fromCharCode(data[i]);
  }
  const fields = header.trim().split(/\s+/);
  if (fields.length !== 3) {
    throw new SnapshotFormatError(`malformed header: ${JSON.stringify(header)}`);
  }
  const version = Number(fields[0]);
  if (version !== VERSION) {
    throw new SnapshotFormatError(`unsupported snapshot version ${version}`);
  }
  const n = Number(fields[1]);
  const t = Number(fields[2]);
  if (!Number.isInteger(n) || n < 8 || n % 2 !== 0 || !Number.isFinite(t)) {
    throw new SnapshotFormatError(`invalid header values n=${fields[1]}, t=${fields[2]}`);
  }
  const expected = HEADER_SIZE + 4 * n * n * 8;
  if (data.length !== expected) {
    throw new SnapshotFormatError(
      `size mismatch: ${data.length} bytes, expected ${expected} for n=${n}`);
  }
  const block = n * n;
  return {
    n,
    t,
    u1: readFloat64Block(data, HEADER_SIZE, block),
    u2: readFloat64Block(data, HEADER_SIZE + 8 * block, block),
    p: readFloat64Block(data, HEADER_SIZE + 16 * block, block),
    q: readFloat64Block(data, HEADER_SIZE + 24 * block, block),
  };
}
