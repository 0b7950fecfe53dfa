/**
 * Run the serialized datasets through a truncated model and emit the
 * feature-source contract: {train,val,test}.npy float32 matrices plus
 * source.json carrying the name, feature width, and bundle manifest hash.
 *
 * Pixels are normalized to [0, 1] before inference; any model-specific
 * preprocessing beyond that must be baked into the saved model. Row i of
 * every split corresponds to row i of the bundle.
 */

import * as tf from '@tensorflow/tfjs'
import * as fs from 'fs'
import * as path from 'path'
import { Bundle, SPLITS, loadBundle } from './bundle'
import { NpyArray, writeNpyFloat32 } from './npy'
import { loadTruncatedModel } from './model'

export interface ExtractorJob {
  modelPath: string // tfjs model.json, or the literal "identity"
  bundleDir: string
  name: string
  outDir: string
  batchSize: number
  layerName?: string
}

function normalizedBatch(images: NpyArray, start: number, end: number): tf.Tensor {
  const [, ...dims] = images.shape
  const per = dims.reduce((a, b) => a * b, 1)
  const slice = new Float32Array((end - start) * per)
  for (let i = 0; i < slice.length; i++) {
    slice[i] = (images.data[start * per + i] as number) / 255.0
  }
  return tf.tensor(slice, [end - start, ...dims])
}

async function splitFeatures(
  images: NpyArray,
  model: tf.LayersModel | null,
  batchSize: number,
): Promise<{ width: number; values: Float32Array }> {
  const n = images.shape[0]
  const per = images.shape.slice(1).reduce((a, b) => a * b, 1)
  if (model === null) {
    // identity extractor: features are the normalized pixels, flattened
    const values = new Float32Array(n * per)
    for (let i = 0; i < values.length; i++) {
      values[i] = (images.data[i] as number) / 255.0
    }
    return { width: per, values }
  }
  let width = -1
  let values = new Float32Array(0)
  for (let start = 0; start < n; start += batchSize) {
    const end = Math.min(start + batchSize, n)
    const input = normalizedBatch(images, start, end)
    const output = tf.tidy(() => {
      const raw = model.predict(input) as tf.Tensor
      return raw.reshape([end - start, -1])
    })
    const flat = (await output.data()) as Float32Array
    if (width < 0) {
      width = output.shape[1] as number
      values = new Float32Array(n * width)
    }
    values.set(flat, start * width)
    input.dispose()
    output.dispose()
  }
  if (width < 0) {
    width = per // empty split before any batch ran
    values = new Float32Array(0)
  }
  return { width, values }
}

export async function extract(job: ExtractorJob): Promise<string> {
  const bundle: Bundle = loadBundle(job.bundleDir)
  const model =
    job.modelPath === 'identity'
      ? null
      : await loadTruncatedModel(job.modelPath, job.layerName)
  fs.mkdirSync(job.outDir, { recursive: true })
  let featureWidth = -1
  for (const split of SPLITS) {
    const { width, values } = await splitFeatures(
      bundle.images[split],
      model,
      job.batchSize,
    )
    if (featureWidth < 0) featureWidth = width
    if (width !== featureWidth) {
      throw new Error(`split ${split} produced width ${width}, expected ${featureWidth}`)
    }
    writeNpyFloat32(
      path.join(job.outDir, `${split}.npy`),
      [bundle.images[split].shape[0], width],
      values,
    )
  }
  const meta = {
    feature_width: featureWidth,
    manifest_hash: bundle.manifestHash,
    name: job.name,
  }
  fs.writeFileSync(
    path.join(job.outDir, 'source.json'),
    JSON.stringify(meta, Object.keys(meta).sort(), 2) + '\n',
  )
  return job.outDir
}
