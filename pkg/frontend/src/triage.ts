// Day triage: list a day's clusters, filter by disease/state, and
// shortlist/reject from the keyboard. Rows change state only after the
// server acknowledges; a 409 swaps in the decision someone else made.

import { ApiClient, ApiError, ConflictError } from "./api.js";
import type { ClusterSummary, Decision, ReviewPayload } from "./types.js";

function eventLocation(summary: ClusterSummary): string {
  const rep = summary.representative;
  const parts = [rep.subdistrict, rep.district, rep.state].filter((p) => p);
  return parts.length ? parts.join(", ") : "(location unresolved)";
}

function reviewBadge(review: ReviewPayload | null): string {
  if (!review) return `<span class="badge pending">pending</span>`;
  const stale = review.stale ? ` <span class="badge stale">stale</span>` : "";
  return `<span class="badge ${review.decision}">${review.decision}</span>${stale}`;
}

export class TriageView {
  private clusters: ClusterSummary[] = [];
  private selected = 0;
  private page = 1;
  private total = 0;
  private notice = "";

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly reviewer: string,
    private readonly day: string,
    private readonly filters: { disease?: string; state?: string },
    private readonly onOpenCluster: (id: string) => void,
    private readonly onChangeQuery: (day: string, disease: string, state: string) => void,
  ) {}

  async load(page = 1): Promise<void> {
    this.page = page;
    try {
      const result = await this.api.dayClusters(this.day, { ...this.filters, page });
      this.clusters = result.items;
      this.total = result.total;
      this.selected = Math.min(this.selected, Math.max(0, this.clusters.length - 1));
      this.render();
    } catch (error) {
      this.renderError(error, () => this.load(page));
    }
  }

  private render(): void {
    const rows = this.clusters
      .map(
        (cluster, index) => `
        <tr data-cluster="${cluster.id}" class="${index === this.selected ? "selected" : ""}">
          <td class="disease">${cluster.representative.standard_disease}</td>
          <td class="location">${eventLocation(cluster)}</td>
          <td class="incident">${cluster.representative.raw.incident}
            / ${cluster.representative.raw.incident_type}
            / ${cluster.representative.raw.number ?? "—"}</td>
          <td class="members">${cluster.member_count}</td>
          <td class="review">${reviewBadge(cluster.review)}</td>
          <td class="actions">
            <button class="open">open</button>
            <button class="shortlist">shortlist</button>
            <button class="reject">reject</button>
          </td>
        </tr>`,
      )
      .join("");
    this.root.innerHTML = `
      <section class="triage">
        <form class="filters">
          <label>day <input name="day" type="date" value="${this.day}"></label>
          <label>disease <input name="disease" value="${this.filters.disease ?? ""}"></label>
          <label>state <input name="state" value="${this.filters.state ?? ""}"></label>
          <button type="submit">apply</button>
        </form>
        <p class="notice" role="status">${this.notice}</p>
        <table class="clusters">
          <thead><tr>
            <th>disease</th><th>location</th><th>incident</th>
            <th>members</th><th>review</th><th></th>
          </tr></thead>
          <tbody>${rows}</tbody>
        </table>
        <p class="summary">${this.total} cluster(s) on ${this.day}.
          Keys: j/k select, s shortlist, r reject, enter open.</p>
      </section>`;
    this.bind();
  }

  private renderError(error: unknown, retry: () => void): void {
    const message = error instanceof ApiError ? `${error.status}: ${error.message}` : String(error);
    this.root.innerHTML = `
      <section class="triage">
        <p class="error" role="alert">${message}</p>
        <button class="retry">retry</button>
      </section>`;
    this.root.querySelector(".retry")?.addEventListener("click", retry);
  }

  private bind(): void {
    const form = this.root.querySelector<HTMLFormElement>(".filters");
    form?.addEventListener("submit", (event) => {
      event.preventDefault();
      const data = new FormData(form);
      this.onChangeQuery(
        String(data.get("day") || this.day),
        String(data.get("disease") || ""),
        String(data.get("state") || ""),
      );
    });
    this.root.querySelectorAll<HTMLTableRowElement>("tbody tr").forEach((row, index) => {
      row.querySelector(".open")?.addEventListener("click", () => {
        this.onOpenCluster(row.dataset.cluster!);
      });
      row.querySelector(".shortlist")?.addEventListener("click", () => {
        void this.decide(index, "shortlisted");
      });
      row.querySelector(".reject")?.addEventListener("click", () => {
        void this.decide(index, "rejected");
      });
      row.addEventListener("click", () => {
        this.selected = index;
        this.render();
      });
    });
  }

  handleKey(key: string): void {
    if (!this.clusters.length) return;
    switch (key) {
      case "j":
      case "ArrowDown":
        this.selected = Math.min(this.selected + 1, this.clusters.length - 1);
        this.render();
        break;
      case "k":
      case "ArrowUp":
        this.selected = Math.max(this.selected - 1, 0);
        this.render();
        break;
      case "s":
        void this.decide(this.selected, "shortlisted");
        break;
      case "r":
        void this.decide(this.selected, "rejected");
        break;
      case "Enter":
        this.onOpenCluster(this.clusters[this.selected].id);
        break;
    }
  }

  async decide(index: number, decision: Decision): Promise<void> {
    const cluster = this.clusters[index];
    if (!cluster) return;
    try {
      const review = await this.api.postReview(cluster.id, decision, this.reviewer);
      cluster.review = review; // only after the 200: server-authoritative
      this.notice = `${cluster.id}: ${review.decision} by ${review.reviewer}`;
    } catch (error) {
      if (error instanceof ConflictError) {
        cluster.review = error.existing; // show the decision that already exists
        this.notice = `${cluster.id}: already decided (${error.existing?.decision ?? "unknown"})`;
      } else {
        this.notice = error instanceof ApiError
          ? `review failed (${error.status}): ${error.message}`
          : `review failed: ${String(error)}`;
      }
    }
    this.render();
  }
}
