// Review form logic, kept free of DOM so the rules are unit-testable:
// verdict controls exist only while a plan is pending, and an in-flight
// submission blocks duplicates (double-click safety).

import type { ActionPlan, ReviewBody, ReviewStateName } from './types.js';

export function controlsEnabled(state: ReviewStateName | null | undefined): boolean {
  return state === 'PendingReview';
}

export function verdictBody(
  kind: 'approve' | 'revise' | 'override',
  reviewer: string,
  plan: ActionPlan,
  edits: Map<string, { action?: string; justification?: string }>,
): ReviewBody {
  const name = reviewer.trim() || 'dashboard';
  if (kind === 'approve') {
    return { verdict: 'approve', reviewer: name };
  }
  if (kind === 'revise') {
    const changes = [...edits.entries()]
      .filter(([, change]) => change.action !== undefined || change.justification !== undefined)
      .map(([supplier, change]) => {
        const edit: Record<string, string> = { supplier };
        if (change.action !== undefined) edit.action = change.action;
        if (change.justification !== undefined) edit.justification = change.justification;
        return edit;
      });
    return { verdict: 'revise', reviewer: name, edits: changes };
  }
  // override replaces the item list wholesale: untouched items carry over
  const items = plan.items.map((item) => {
    const change = edits.get(item.supplier);
    return {
      supplier: item.supplier,
      action: change?.action ?? item.action,
      justification: change?.justification ?? item.justification,
    };
  });
  return { verdict: 'override', reviewer: name, items };
}

export class SubmissionGuard {
  private inFlight = false;

  /** Runs the task unless another submission is already in flight. */
  async run<T>(task: () => Promise<T>): Promise<T | null> {
    if (this.inFlight) {
      return null;
    }
    this.inFlight = true;
    try {
      return await task();
    } finally {
      this.inFlight = false;
    }
  }

  get busy(): boolean {
    return this.inFlight;
  }
}
