/**
 * Minimal NPY v1.0 reader/writer, enough for the bundle contract:
 * read uint8 image tensors and int64 label vectors, write float32
 * feature matrices. Little-endian, row-major only.
 */

import * as fs from 'fs'

const MAGIC = Buffer.from('\x93NUMPY', 'latin1')

export interface NpyArray {
  dtype: 'uint8' | 'float32' | 'int64'
  shape: number[]
  /** flat row-major values; int64 narrowed to Number (labels are small) */
  data: Float32Array | Uint8Array | Float64Array
}

const DESCR_TO_DTYPE: Record<string, NpyArray['dtype']> = {
  '|u1': 'uint8',
  '<u1': 'uint8',
  '<f4': 'float32',
  '<i8': 'int64',
}

export function readNpy(path: string): NpyArray {
  const blob = fs.readFileSync(path)
  if (blob.length < 10 || !blob.subarray(0, 6).equals(MAGIC)) {
    throw new Error(`${path}: not an NPY file`)
  }
  if (blob[6] !== 1 || blob[7] !== 0) {
    throw new Error(`${path}: unsupported NPY version ${blob[6]}.${blob[7]}`)
  }
  const headerLen = blob.readUInt16LE(8)
  const header = blob.subarray(10, 10 + headerLen).toString('latin1')
  const descrMatch = header.match(/'descr':\s*'([^']+)'/)
  const fortranMatch = header.match(/'fortran_order':\s*(True|False)/)
  const shapeMatch = header.match(/'shape':\s*\(([^)]*)\)/)
  if (!descrMatch || !fortranMatch || !shapeMatch) {
    throw new Error(`${path}: malformed NPY header`)
  }
  if (fortranMatch[1] === 'True') {
    throw new Error(`${path}: column-major NPY not supported`)
  }
  const dtype = DESCR_TO_DTYPE[descrMatch[1]]
  if (!dtype) {
    throw new Error(`${path}: unsupported dtype ${descrMatch[1]}`)
  }
  const shape = shapeMatch[1]
    .split(',')
    .map(s => s.trim())
    .filter(s => s.length > 0)
    .map(s => parseInt(s, 10))
  const count = shape.reduce((a, b) => a * b, 1)
  const payload = blob.subarray(10 + headerLen)
  if (dtype === 'uint8') {
    if (payload.length !== count) throw new Error(`${path}: truncated payload`)
    return { dtype, shape, data: new Uint8Array(payload) }
  }
  if (dtype === 'float32') {
    if (payload.length !== count * 4) throw new Error(`${path}: truncated payload`)
    const data = new Float32Array(count)
    for (let i = 0; i < count; i++) data[i] = payload.readFloatLE(i * 4)
    return { dtype, shape, data }
  }
  if (payload.length !== count * 8) throw new Error(`${path}: truncated payload`)
  const data = new Float64Array(count)
  for (let i = 0; i < count; i++) data[i] = Number(payload.readBigInt64LE(i * 8))
  return { dtype, shape, data }
}

export function writeNpyFloat32(path: string, shape: number[], values: Float32Array): void {
  const count = shape.reduce((a, b) => a * b, 1)
  if (values.length !== count) {
    throw new Error(`value count ${values.length} does not match shape (${shape})`)
  }
  const shapeRepr = shape.length === 1 ? `(${shape[0]},)` : `(${shape.join(', ')})`
  let header = `{'descr': '<f4', 'fortran_order': False, 'shape': ${shapeRepr}, }`
  const unpadded = 10 + header.length + 1
  header = header + ' '.repeat((64 - (unpadded % 64)) % 64) + '\n'
  const payload = Buffer.alloc(count * 4)
  for (let i = 0; i < count; i++) payload.writeFloatLE(values[i], i * 4)
  const head = Buffer.alloc(10)
  MAGIC.copy(head, 0)
  head[6] = 1
  head[7] = 0
  head.writeUInt16LE(header.length, 8)
  fs.writeFileSync(path, Buffer.concat([head, Buffer.from(header, 'latin1'), payload]))
}
