/** Read the dataset-bundle contract: manifest.json plus six NPY tensors. */

import * as crypto from 'crypto'
import * as fs from 'fs'
import * as path from 'path'
import { NpyArray, readNpy } from './npy'

export const SPLITS = ['train', 'val', 'test'] as const
export type Split = (typeof SPLITS)[number]

export interface Bundle {
  dir: string
  manifestHash: string
  classNames: string[]
  images: Record<Split, NpyArray>
  labels: Record<Split, NpyArray>
}

export function loadBundle(bundleDir: string): Bundle {
  const manifestPath = path.join(bundleDir, 'manifest.json')
  const raw = fs.readFileSync(manifestPath)
  const manifest = JSON.parse(raw.toString('utf-8'))
  const manifestHash = crypto.createHash('sha256').update(raw).digest('hex')
  const images = {} as Record<Split, NpyArray>
  const labels = {} as Record<Split, NpyArray>
  for (const split of SPLITS) {
    images[split] = readNpy(path.join(bundleDir, `x_${split}.npy`))
    labels[split] = readNpy(path.join(bundleDir, `y_${split}.npy`))
    if (images[split].shape[0] !== labels[split].shape[0]) {
      throw new Error(
        `${split}: ${images[split].shape[0]} images but ${labels[split].shape[0]} labels`,
      )
    }
  }
  return { dir: bundleDir, manifestHash, classNames: manifest.class_names, images, labels }
}
