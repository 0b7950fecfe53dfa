/**
 * Model loading and truncation at the layer before classification.
 *
 * Models are tfjs-layers artifacts on disk (model.json + weight shards),
 * loaded through a filesystem IOHandler so no node-specific tf build is
 * required. The special name "identity" selects the built-in flatten-only
 * extractor whose features are exactly the normalized input pixels.
 */

import * as tf from '@tensorflow/tfjs'
import * as fs from 'fs'
import * as path from 'path'

export function fileLoadHandler(modelJsonPath: string): tf.io.IOHandler {
  return {
    load: async () => {
      const dir = path.dirname(modelJsonPath)
      const modelJson = JSON.parse(fs.readFileSync(modelJsonPath, 'utf-8'))
      const weightSpecs: tf.io.WeightsManifestEntry[] = []
      const buffers: Buffer[] = []
      for (const group of modelJson.weightsManifest ?? []) {
        weightSpecs.push(...group.weights)
        for (const p of group.paths) {
          buffers.push(fs.readFileSync(path.join(dir, p)))
        }
      }
      const joined = Buffer.concat(buffers)
      const weightData = joined.buffer.slice(
        joined.byteOffset,
        joined.byteOffset + joined.byteLength,
      )
      return {
        modelTopology: modelJson.modelTopology,
        format: modelJson.format,
        generatedBy: modelJson.generatedBy,
        convertedBy: modelJson.convertedBy,
        weightSpecs,
        weightData,
      }
    },
  }
}

export function fileSaveHandler(dir: string): tf.io.IOHandler {
  return {
    save: async (artifacts: tf.io.ModelArtifacts) => {
      fs.mkdirSync(dir, { recursive: true })
      const weightsManifest = [
        { paths: ['weights.bin'], weights: artifacts.weightSpecs },
      ]
      fs.writeFileSync(
        path.join(dir, 'model.json'),
        JSON.stringify({
          modelTopology: artifacts.modelTopology,
          format: artifacts.format,
          generatedBy: artifacts.generatedBy,
          convertedBy: artifacts.convertedBy,
          weightsManifest,
        }),
      )
      fs.writeFileSync(
        path.join(dir, 'weights.bin'),
        Buffer.from(artifacts.weightData as ArrayBuffer),
      )
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: 'JSON' as const,
        },
      }
    },
  }
}

/**
 * Pick the feature layer: the named one when given, otherwise the last
 * layer with trainable parameters before the final classification layer.
 */
export function selectFeatureLayer(
  model: tf.LayersModel,
  layerName?: string,
): tf.layers.Layer {
  if (layerName) {
    return model.getLayer(layerName)
  }
  const inner = model.layers.slice(0, -1)
  for (let i = inner.length - 1; i >= 0; i--) {
    if (inner[i].countParams() > 0) {
      return inner[i]
    }
  }
  throw new Error(
    'no parameterized layer found before the classification head; pass --layer',
  )
}

export async function loadTruncatedModel(
  modelJsonPath: string,
  layerName?: string,
): Promise<tf.LayersModel> {
  const full = await tf.loadLayersModel(fileLoadHandler(modelJsonPath))
  const layer = selectFeatureLayer(full, layerName)
  return tf.model({ inputs: full.inputs, outputs: layer.output as tf.SymbolicTensor })
}
