// Cluster detail: member events with their source articles, pairwise
// similarity badges, mapping provenance, grounding warnings, and the
// per-domain unreliable-source flagging flow.

import { ApiClient, ApiError, ConflictError } from "./api.js";
import type { ClusterDetail, ClusterMember, Decision, SourceFlagPayload } from "./types.js";

function similarityBadges(detail: ClusterDetail, eventId: string): string {
  return detail.similarities
    .filter((edge) => edge.a === eventId || edge.b === eventId)
    .map((edge) => {
      const other = edge.a === eventId ? edge.b : edge.a;
      return `<span class="badge sim" title="similarity to ${other}">${edge.similarity.toFixed(2)}</span>`;
    })
    .join(" ");
}

function memberCard(detail: ClusterDetail, member: ClusterMember, flags: Map<string, SourceFlagPayload>): string {
  const event = member.event;
  const article = member.article;
  const location = [event.subdistrict, event.district, event.state].filter((p) => p).join(", ");
  const representative = event.id === detail.representative_id
    ? `<span class="badge representative">representative</span>`
    : "";
  const grounding = member.grounded === false
    ? `<span class="badge warning" title="the reported count does not occur in the article text">ungrounded number</span>`
    : "";
  const flag = flags.get(article.domain);
  const flagState = flag
    ? flag.confirmed
      ? `<span class="badge flagged">blocklisted</span>`
      : `<span class="badge pending-flag">flag pending confirmation</span>
         <button class="confirm-source" data-domain="${article.domain}">confirm</button>`
    : `<button class="flag-source" data-domain="${article.domain}">flag unreliable</button>`;
  return `
    <article class="member" data-event="${event.id}">
      <header>
        <strong>${event.standard_disease}</strong>
        <span class="location">${location || "(location unresolved)"}</span>
        ${representative} ${grounding}
      </header>
      <p class="tuple">
        ${event.raw.incident} / ${event.raw.incident_type} / ${event.raw.number ?? "—"}
        <span class="provenance" title="how the disease name was standardized">
          mapped via ${event.mapping_method}</span>
        <span class="extractor">extractor: ${event.raw.extractor}</span>
      </p>
      <p class="article">
        <a href="${article.url}" rel="noreferrer">${article.title || article.url}</a>
        <span class="domain">${article.domain}</span> ${flagState}
      </p>
      <p class="description">${article.description}</p>
      <p class="similarities">${similarityBadges(detail, event.id)}</p>
    </article>`;
}

export class DetailView {
  private detail: ClusterDetail | null = null;
  private flags = new Map<string, SourceFlagPayload>();
  private notice = "";

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly reviewer: string,
    private readonly clusterId: string,
    private readonly onBack: () => void,
  ) {}

  async load(): Promise<void> {
    try {
      const [detail, sources] = await Promise.all([
        this.api.clusterDetail(this.clusterId),
        this.api.sources(),
      ]);
      this.detail = detail;
      this.flags = new Map(sources.items.map((flag) => [flag.domain, flag]));
      this.render();
    } catch (error) {
      const message = error instanceof ApiError ? `${error.status}: ${error.message}` : String(error);
      this.root.innerHTML = `
        <section class="detail">
          <p class="error" role="alert">${message}</p>
          <button class="retry">retry</button>
          <button class="back">back</button>
        </section>`;
      this.root.querySelector(".retry")?.addEventListener("click", () => void this.load());
      this.root.querySelector(".back")?.addEventListener("click", this.onBack);
    }
  }

  private render(): void {
    const detail = this.detail;
    if (!detail) return;
    const review = detail.review
      ? `<span class="badge ${detail.review.decision}">${detail.review.decision}</span>
         by ${detail.review.reviewer}${detail.review.stale ? " (stale)" : ""}`
      : `<span class="badge pending">pending</span>`;
    this.root.innerHTML = `
      <section class="detail">
        <button class="back">&larr; back to day</button>
        <h2>cluster ${detail.id} <small>${detail.day}</small></h2>
        <p class="review-state">review: ${review}
          <button class="shortlist">shortlist</button>
          <button class="reject">reject</button>
        </p>
        <p class="notice" role="status">${this.notice}</p>
        <div class="members">
          ${detail.members.map((m) => memberCard(detail, m, this.flags)).join("")}
        </div>
      </section>`;
    this.bind();
  }

  private bind(): void {
    this.root.querySelector(".back")?.addEventListener("click", this.onBack);
    this.root.querySelector(".shortlist")?.addEventListener("click", () => {
      void this.decide("shortlisted");
    });
    this.root.querySelector(".reject")?.addEventListener("click", () => {
      void this.decide("rejected");
    });
    this.root.querySelectorAll<HTMLButtonElement>(".flag-source").forEach((button) => {
      button.addEventListener("click", () => void this.flag(button.dataset.domain!));
    });
    this.root.querySelectorAll<HTMLButtonElement>(".confirm-source").forEach((button) => {
      button.addEventListener("click", () => void this.confirm(button.dataset.domain!));
    });
  }

  private async decide(decision: Decision): Promise<void> {
    if (!this.detail) return;
    try {
      this.detail.review = await this.api.postReview(this.detail.id, decision, this.reviewer);
      this.notice = `decision recorded: ${decision}`;
    } catch (error) {
      if (error instanceof ConflictError) {
        this.detail.review = error.existing;
        this.notice = `already decided (${error.existing?.decision ?? "unknown"})`;
      } else {
        this.notice = `review failed: ${String(error)}`;
      }
    }
    this.render();
  }

  private async flag(domain: string): Promise<void> {
    try {
      const flag = await this.api.flagSource(domain, "flagged from review UI", this.reviewer);
      this.flags.set(domain, flag);
      this.notice = `${domain} flagged; awaiting confirmation`;
    } catch (error) {
      this.notice = `flag failed: ${String(error)}`;
    }
    this.render();
  }

  private async confirm(domain: string): Promise<void> {
    try {
      const flag = await this.api.confirmSource(domain);
      this.flags.set(domain, flag);
      this.notice = `${domain} confirmed into the blocklist`;
    } catch (error) {
      this.notice = `confirm failed: ${String(error)}`;
    }
    this.render();
  }
}
