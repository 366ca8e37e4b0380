// Dashboard wiring: poll the run list, show the selected run's report,
// network, risk table, and plan, and submit review verdicts. The server is
// the single source of truth; after every verdict the run is re-fetched.

import { ApiClient, ApiRejection } from './api.js';
import { renderNetwork } from './render.js';
import { SubmissionGuard, controlsEnabled, verdictBody } from './review.js';
import type { ActionPlan, RunRecord } from './types.js';

const POLL_INTERVAL_MS = 2000;

export class Dashboard {
  private readonly api: ApiClient;
  private readonly root: HTMLElement;
  private readonly guard = new SubmissionGuard();
  private selected: string | null = null;
  private lastSerialized = '';
  private pendingEdits = new Map<string, { action?: string; justification?: string }>();
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(api: ApiClient, root: HTMLElement) {
    this.api = api;
    this.root = root;
  }

  start(): void {
    this.root.innerHTML = `
      <header class="topbar">
        <h1>chainwatch review</h1>
        <span id="conn" class="chip">connecting…</span>
      </header>
      <main class="columns">
        <nav id="run-list" class="run-list"></nav>
        <section id="run-detail" class="run-detail">
          <p class="empty-state">Select a run.</p>
        </section>
      </main>
      <div id="error-panel" class="error-panel" hidden></div>
    `;
    void this.refresh();
    this.timer = setInterval(() => void this.refresh(), POLL_INTERVAL_MS);
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
  }

  private byId<T extends HTMLElement>(id: string): T {
    return this.root.querySelector(`#${id}`) as T;
  }

  private showError(message: string): void {
    const panel = this.byId<HTMLElement>('error-panel');
    panel.textContent = message;
    panel.hidden = false;
  }

  private clearError(): void {
    this.byId<HTMLElement>('error-panel').hidden = true;
  }

  async refresh(): Promise<void> {
    try {
      const { runs } = await this.api.listRuns();
      this.byId<HTMLElement>('conn').textContent = 'connected';
      this.renderRunList(runs);
      if (this.selected) {
        const record = await this.api.getRun(this.selected);
        const serialized = JSON.stringify(record);
        if (serialized !== this.lastSerialized) {
          this.lastSerialized = serialized;
          await this.renderRun(record);
        }
      }
    } catch (err) {
      this.byId<HTMLElement>('conn').textContent = 'offline';
      if (err instanceof ApiRejection) this.showError(`${err.code}: ${err.message}`);
    }
  }

  private renderRunList(runs: string[]): void {
    const list = this.byId<HTMLElement>('run-list');
    list.replaceChildren();
    if (runs.length === 0) {
      const p = document.createElement('p');
      p.className = 'empty-state';
      p.textContent = 'No runs yet.';
      list.appendChild(p);
      return;
    }
    for (const runId of runs) {
      const button = document.createElement('button');
      button.className = runId === this.selected ? 'run-entry selected' : 'run-entry';
      button.textContent = runId;
      button.addEventListener('click', () => void this.select(runId));
      list.appendChild(button);
    }
  }

  async select(runId: string): Promise<void> {
    this.selected = runId;
    this.pendingEdits = new Map();
    this.lastSerialized = '';
    await this.refresh();
  }

  private async renderRun(record: RunRecord): Promise<void> {
    this.clearError();
    const detail = this.byId<HTMLElement>('run-detail');
    detail.replaceChildren();
    detail.append(
      this.reportPanel(record),
      this.networkPanel(),
      this.riskPanel(record),
      this.planPanel(record),
      this.sourcingPanel(record),
    );
    await this.loadNetwork(record.run_id);
  }

  private panel(title: string): HTMLElement {
    const section = document.createElement('section');
    section.className = 'panel';
    const heading = document.createElement('h2');
    heading.textContent = title;
    section.appendChild(heading);
    return section;
  }

  private reportPanel(record: RunRecord): HTMLElement {
    const panel = this.panel('Disruption report');
    const report = record.stages.o1_report;
    const body = document.createElement('div');
    if (!report) {
      body.textContent = `No report (stage1: ${record.status.stage1?.state ?? 'unknown'})`;
    } else {
      body.innerHTML = `
        <p><strong>${report.disruption_type}</strong> — ${report.summary}</p>
        <p>Countries: ${report.countries.join(', ') || '—'}</p>
        <p>Industries: ${report.industries.join(', ') || '—'}</p>
        <p>Companies: ${report.companies.join(', ') || '—'}</p>
      `;
    }
    panel.appendChild(body);
    return panel;
  }

  private networkPanel(): HTMLElement {
    const panel = this.panel('Disrupted network');
    const holder = document.createElement('div');
    holder.id = 'network-holder';
    panel.appendChild(holder);
    return panel;
  }

  private async loadNetwork(runId: string): Promise<void> {
    const holder = this.root.querySelector('#network-holder') as HTMLElement | null;
    if (!holder) return;
    try {
      const doc = await this.api.getViz(runId);
      renderNetwork(holder, doc);
    } catch (err) {
      const message =
        err instanceof ApiRejection ? `${err.code}: ${err.message}` : String(err);
      const p = document.createElement('p');
      p.className = 'empty-state';
      p.textContent =
        message.includes('viz_unavailable') || message.includes('no disrupted paths')
          ? 'No exposure: this run found no disrupted supplier paths.'
          : message;
      holder.replaceChildren(p);
    }
  }

  private riskPanel(record: RunRecord): HTMLElement {
    const panel = this.panel('Tier-1 risk');
    const assessment = record.stages.o5_assessment;
    if (!assessment || assessment.suppliers.length === 0) {
      const p = document.createElement('p');
      p.className = 'empty-state';
      p.textContent = 'No exposed Tier-1 suppliers.';
      panel.appendChild(p);
      return panel;
    }
    const table = document.createElement('table');
    table.innerHTML =
      '<thead><tr><th>supplier</th><th>score</th><th>level</th></tr></thead>';
    const tbody = document.createElement('tbody');
    for (const s of assessment.suppliers) {
      const row = document.createElement('tr');
      row.innerHTML = `<td>${s.supplier}</td><td>${s.score.toFixed(6)}</td>` +
        `<td><span class="chip level-${s.level}">${s.level}</span></td>`;
      tbody.appendChild(row);
    }
    table.appendChild(tbody);
    panel.appendChild(table);
    return panel;
  }

  private planPanel(record: RunRecord): HTMLElement {
    const panel = this.panel('Action plan');
    const plan = record.stages.o6_plan;
    if (!plan) {
      const p = document.createElement('p');
      p.className = 'empty-state';
      p.textContent = 'No plan generated.';
      panel.appendChild(p);
      return panel;
    }

    const state = document.createElement('p');
    state.innerHTML = `Review state: <span id="plan-state" class="chip state-${plan.review_state}">${plan.review_state}</span>`;
    panel.appendChild(state);

    panel.appendChild(this.planItemsTable(plan));

    const narrative = document.createElement('details');
    narrative.innerHTML = `
      <summary>Narrative sections</summary>
      <h3>Disruption summary</h3><p>${plan.narrative.disruption_summary}</p>
      <h3>Network impact analysis</h3><p>${plan.narrative.network_impact_analysis}</p>
      <h3>Replacement recommendations</h3><p>${plan.narrative.replacement_recommendations}</p>
    `;
    panel.appendChild(narrative);

    if (plan.audit.length > 0) {
      const audit = document.createElement('ul');
      audit.className = 'audit';
      for (const entry of plan.audit) {
        const li = document.createElement('li');
        li.textContent = `${entry.timestamp} — ${entry.reviewer}: ${entry.verdict} ${entry.detail}`;
        audit.appendChild(li);
      }
      panel.appendChild(audit);
    }

    panel.appendChild(this.reviewForm(record, plan));
    return panel;
  }

  private planItemsTable(plan: ActionPlan): HTMLElement {
    const enabled = controlsEnabled(plan.review_state);
    const table = document.createElement('table');
    table.innerHTML =
      '<thead><tr><th>supplier</th><th>action</th><th>justification</th></tr></thead>';
    const tbody = document.createElement('tbody');
    for (const item of plan.items) {
      const row = document.createElement('tr');
      const supplier = document.createElement('td');
      supplier.textContent = item.supplier;
      const action = document.createElement('td');
      if (enabled) {
        const select = document.createElement('select');
        select.className = 'action-edit';
        for (const name of ['Replace', 'IncreaseMonitoring', 'StandardOperations']) {
          const option = document.createElement('option');
          option.value = name;
          option.textContent = name;
          option.selected = name === item.action;
          select.appendChild(option);
        }
        select.addEventListener('change', () => {
          const edit = this.pendingEdits.get(item.supplier) ?? {};
          edit.action = select.value;
          this.pendingEdits.set(item.supplier, edit);
        });
        action.appendChild(select);
      } else {
        action.textContent = item.action;
      }
      const justification = document.createElement('td');
      justification.textContent = item.justification;
      row.append(supplier, action, justification);
      tbody.appendChild(row);
    }
    table.appendChild(tbody);
    return table;
  }

  private reviewForm(record: RunRecord, plan: ActionPlan): HTMLElement {
    const form = document.createElement('div');
    form.className = 'review-form';
    const enabled = controlsEnabled(plan.review_state);

    const reviewer = document.createElement('input');
    reviewer.id = 'reviewer-name';
    reviewer.placeholder = 'reviewer name';
    reviewer.disabled = !enabled;

    const makeButton = (label: string, kind: 'approve' | 'revise' | 'override') => {
      const button = document.createElement('button');
      button.id = `verdict-${kind}`;
      button.textContent = label;
      button.disabled = !enabled;
      button.addEventListener('click', () => void this.submit(record.run_id, kind, plan, reviewer.value));
      return button;
    };

    form.append(
      reviewer,
      makeButton('Approve', 'approve'),
      makeButton('Revise', 'revise'),
      makeButton('Override', 'override'),
    );
    if (!enabled) {
      const note = document.createElement('p');
      note.className = 'empty-state';
      note.textContent = 'Plan is in a terminal review state; verdicts are disabled.';
      form.appendChild(note);
    }
    return form;
  }

  private async submit(
    runId: string,
    kind: 'approve' | 'revise' | 'override',
    plan: ActionPlan,
    reviewer: string,
  ): Promise<void> {
    const body = verdictBody(kind, reviewer, plan, this.pendingEdits);
    const outcome = await this.guard.run(() => this.api.submitReview(runId, body));
    if (outcome === null) return; // duplicate click while in flight
    this.pendingEdits = new Map();
    this.lastSerialized = '';
    await this.refresh();
  }

  private sourcingPanel(record: RunRecord): HTMLElement {
    const panel = this.panel('Alternative sourcing');
    const sourcing = record.stages.o7_sourcing;
    if (!sourcing) {
      const p = document.createElement('p');
      p.className = 'empty-state';
      const status = record.status.stage7;
      p.textContent = status?.reason
        ? `Sourcing not run (${status.reason}).`
        : 'Sourcing not run.';
      panel.appendChild(p);
      return panel;
    }
    for (const result of sourcing) {
      const block = document.createElement('div');
      const heading = document.createElement('h3');
      heading.textContent = `${result.supplier} — ${result.product}`;
      block.appendChild(heading);
      if (result.candidates.length === 0) {
        const p = document.createElement('p');
        p.textContent = result.note ?? 'no alternatives found';
        block.appendChild(p);
      } else {
        const ul = document.createElement('ul');
        for (const candidate of result.candidates) {
          const li = document.createElement('li');
          li.textContent =
            `${candidate.name} (${candidate.country}, ${candidate.industry}) — ${candidate.validation}` +
            (candidate.note ? ` [${candidate.note}]` : '');
          ul.appendChild(li);
        }
        block.appendChild(ul);
      }
      panel.appendChild(block);
    }
    return panel;
  }
}
