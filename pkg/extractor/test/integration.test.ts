/**
 * End-to-end contract check against the primary toolkit: features emitted
 * here must load through its tensor store and drive a full evaluate run.
 * Skipped when python3 or the primary package is unavailable.
 */

import { execFileSync, execSync } from 'child_process'
import * as fs from 'fs'
import * as os from 'os'
import * as path from 'path'
import { describe, expect, it } from 'vitest'
import { extract } from '../src/extract'
import { makeBundle } from './helpers'

function primaryAvailable(): boolean {
  try {
    execSync('python3 -c "import histostack"', { stdio: 'ignore' })
    return true
  } catch {
    return false
  }
}

describe.skipIf(!primaryAvailable())('primary-side evaluate', () => {
  it('runs unchanged on extracted features', { timeout: 120_000 }, async () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'integration-'))
    const fixture = makeBundle(path.join(dir, 'bundle'), { train: 20, val: 6, test: 6 })
    const sources: string[] = []
    for (const name of ['ext-a', 'ext-b', 'ext-c']) {
      sources.push(
        await extract({
          modelPath: 'identity',
          bundleDir: fixture.dir,
          name,
          outDir: path.join(dir, 'sources', name),
          batchSize: 8,
        }),
      )
    }
    const args = [
      '-m', 'histostack.cli', '--json', 'evaluate',
      '--dataset', 'pixel-toy', '--bundle', fixture.dir,
      '--head', 'rf', '--grid', '{"n_estimators": [20], "max_depth": [null]}',
      '--seed', '1', '--out', path.join(dir, 'runs'),
    ]
    for (const src of sources) {
      args.push('--sources', src)
    }
    const stdout = execFileSync('python3', args, { encoding: 'utf-8' })
    const record = JSON.parse(stdout).record
    expect(record.metrics.aggregate.accuracy).toBe(1.0)
    expect(record.ensemble.sources).toEqual(['ext-a', 'ext-b', 'ext-c'])
  })
})
