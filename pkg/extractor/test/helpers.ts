/** Fixture builders: raw NPY buffers and on-disk bundles for tests. */

import * as fs from 'fs'
import * as path from 'path'

const MAGIC = '\x93NUMPY'

export function npyBuffer(
  dtype: 'uint8' | 'float32' | 'int64',
  shape: number[],
  values: number[],
): Buffer {
  const descr = { uint8: '|u1', float32: '<f4', int64: '<i8' }[dtype]
  const itemsize = { uint8: 1, float32: 4, int64: 8 }[dtype]
  const shapeRepr = shape.length === 1 ? `(${shape[0]},)` : `(${shape.join(', ')})`
  let header = `{'descr': '${descr}', 'fortran_order': False, 'shape': ${shapeRepr}, }`
  const unpadded = 10 + header.length + 1
  header = header + ' '.repeat((64 - (unpadded % 64)) % 64) + '\n'
  const payload = Buffer.alloc(values.length * itemsize)
  values.forEach((v, i) => {
    if (dtype === 'uint8') payload.writeUInt8(v, i)
    else if (dtype === 'float32') payload.writeFloatLE(v, i * 4)
    else payload.writeBigInt64LE(BigInt(v), i * 8)
  })
  const head = Buffer.alloc(10)
  head.write(MAGIC, 0, 'latin1')
  head[6] = 1
  head[7] = 0
  head.writeUInt16LE(header.length, 8)
  return Buffer.concat([head, Buffer.from(header, 'latin1'), payload])
}

export interface BundleFixture {
  dir: string
  pixels: Record<string, number[]>
  labels: Record<string, number[]>
  counts: Record<string, number>
  height: number
  width: number
}

/**
 * Bundle whose pixels encode the label (class 0 dark, class 1 bright) so
 * identity features make the task trivially separable. One optional
 * sentinel row in the test split is set to all-white.
 */
export function makeBundle(
  dir: string,
  counts = { train: 12, val: 4, test: 4 },
  sentinelTestRow = -1,
  height = 3,
  width = 3,
): BundleFixture {
  fs.mkdirSync(dir, { recursive: true })
  const per = height * width * 3
  const pixels: Record<string, number[]> = {}
  const labels: Record<string, number[]> = {}
  let state = 12345
  const rand = () => {
    state = (state * 1103515245 + 12345) % 2147483648
    return state / 2147483648
  }
  for (const [split, n] of Object.entries(counts)) {
    const y = Array.from({ length: n }, (_, i) => i % 2)
    const x: number[] = []
    for (let i = 0; i < n; i++) {
      const base = y[i] === 0 ? 60 : 190
      for (let j = 0; j < per; j++) {
        x.push(Math.max(0, Math.min(255, Math.round(base + (rand() - 0.5) * 40))))
      }
    }
    if (split === 'test' && sentinelTestRow >= 0) {
      for (let j = 0; j < per; j++) x[sentinelTestRow * per + j] = 255
    }
    pixels[split] = x
    labels[split] = y
    fs.writeFileSync(
      path.join(dir, `x_${split}.npy`),
      npyBuffer('uint8', [n, height, width, 3], x),
    )
    fs.writeFileSync(path.join(dir, `y_${split}.npy`), npyBuffer('int64', [n], y))
  }
  const manifest = {
    version: 1,
    seed: 0,
    ratios: [0.6, 0.2, 0.2],
    class_names: ['dark', 'bright'],
    image_size: [height, width],
    entries: [],
  }
  fs.writeFileSync(path.join(dir, 'manifest.json'), JSON.stringify(manifest, null, 2) + '\n')
  return { dir, pixels, labels, counts, height, width }
}
