import { describe, expect, it } from 'vitest';

import { SubmissionGuard, controlsEnabled, verdictBody } from '../src/review.js';
import type { ActionPlan } from '../src/types.js';

const plan: ActionPlan = {
  items: [
    { supplier: 'johnson-matthey-plc', action: 'Replace', justification: 'high risk' },
    { supplier: 'other-supplier', action: 'StandardOperations', justification: 'low risk' },
  ],
  narrative: {
    disruption_summary: 's',
    network_impact_analysis: 'n',
    replacement_recommendations: 'r',
  },
  review_state: 'PendingReview',
  audit: [],
};

describe('controlsEnabled', () => {
  it('only a pending plan accepts verdicts', () => {
    expect(controlsEnabled('PendingReview')).toBe(true);
    expect(controlsEnabled('Approved')).toBe(false);
    expect(controlsEnabled('Overridden')).toBe(false);
    expect(controlsEnabled('Revised')).toBe(false);
    expect(controlsEnabled(null)).toBe(false);
  });
});

describe('verdictBody', () => {
  it('approve carries only the reviewer', () => {
    expect(verdictBody('approve', ' alex ', plan, new Map())).toEqual({
      verdict: 'approve',
      reviewer: 'alex',
    });
  });

  it('blank reviewer falls back to a default name', () => {
    expect(verdictBody('approve', '', plan, new Map()).reviewer).toBe('dashboard');
  });

  it('revise sends only the touched items', () => {
    const edits = new Map([
      ['johnson-matthey-plc', { action: 'IncreaseMonitoring' }],
      ['other-supplier', {}],
    ]);
    const body = verdictBody('revise', 'alex', plan, edits);
    expect(body.edits).toEqual([
      { supplier: 'johnson-matthey-plc', action: 'IncreaseMonitoring' },
    ]);
  });

  it('override replaces the whole item list, carrying untouched rows over', () => {
    const edits = new Map([
      ['johnson-matthey-plc', { action: 'StandardOperations', justification: 'accepted' }],
    ]);
    const body = verdictBody('override', 'sam', plan, edits);
    expect(body.items).toEqual([
      { supplier: 'johnson-matthey-plc', action: 'StandardOperations', justification: 'accepted' },
      { supplier: 'other-supplier', action: 'StandardOperations', justification: 'low risk' },
    ]);
  });
});

describe('SubmissionGuard', () => {
  it('drops a second submission while the first is in flight', async () => {
    const guard = new SubmissionGuard();
    let resolveFirst!: (v: string) => void;
    const first = guard.run(
      () => new Promise<string>((resolve) => (resolveFirst = resolve)),
    );
    const second = await guard.run(async () => 'duplicate');
    expect(second).toBeNull();
    expect(guard.busy).toBe(true);
    resolveFirst('done');
    expect(await first).toBe('done');
    expect(guard.busy).toBe(false);
  });

  it('allows a new submission after the previous settles', async () => {
    const guard = new SubmissionGuard();
    expect(await guard.run(async () => 1)).toBe(1);
    expect(await guard.run(async () => 2)).toBe(2);
  });

  it('releases the guard when a submission rejects', async () => {
    const guard = new SubmissionGuard();
    await expect(
      guard.run(async () => {
        throw new Error('api down');
      }),
    ).rejects.toThrow('api down');
    expect(guard.busy).toBe(false);
  });
});
