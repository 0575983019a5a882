// Shared builders for view tests: payload factories and a fake API.

import type {
  ClusterDetail,
  ClusterPage,
  ClusterSummary,
  MappedEventPayload,
  ReviewPayload,
  SourceFlagPayload,
} from "../src/types.js";

let sequence = 0;

export function mappedEvent(overrides: Partial<MappedEventPayload> = {}): MappedEventPayload {
  sequence += 1;
  return {
    id: `event-${sequence}`,
    raw: {
      disease: "Dengue",
      location: "Pune",
      incident: "case",
      incident_type: "new",
      number: 12,
      article_id: `article-${sequence}`,
      extractor: "llm",
      confidence: null,
    },
    standard_disease: "Dengue",
    state: "Maharashtra",
    district: "Pune",
    subdistrict: "",
    mapping_method: "table",
    international: false,
    ...overrides,
  };
}

export function summary(overrides: Partial<ClusterSummary> = {}): ClusterSummary {
  sequence += 1;
  return {
    id: `cluster-${sequence}`,
    day: "2024-06-21",
    member_count: 2,
    representative: mappedEvent(),
    review: null,
    ...overrides,
  };
}

export function review(overrides: Partial<ReviewPayload> = {}): ReviewPayload {
  return {
    cluster_id: "cluster-1",
    decision: "shortlisted",
    reviewer: "ncdc",
    note: "",
    decided_at: "2024-06-21T12:00:00Z",
    stale: false,
    ...overrides,
  };
}

export function detail(overrides: Partial<ClusterDetail> = {}): ClusterDetail {
  const eventA = mappedEvent();
  const eventB = mappedEvent({ standard_disease: "Others", mapping_method: "unmapped" });
  return {
    id: "cluster-1",
    day: "2024-06-21",
    representative_id: eventA.id,
    members: [
      {
        event: eventA,
        article: {
          id: eventA.raw.article_id,
          url: "https://outlet.example/story",
          domain: "outlet.example",
          published_at: "2024-06-21T08:00:00Z",
          fetched_at: "2024-06-21T09:00:00Z",
          language: "en",
          title: "Dengue cases rise in Pune",
          description: "12 admitted",
          text: "Dengue cases rise in Pune. 12 admitted",
          translated_text: null,
        },
        grounded: true,
      },
      {
        event: eventB,
        article: {
          id: eventB.raw.article_id,
          url: "https://tabloid.example/story",
          domain: "tabloid.example",
          published_at: null,
          fetched_at: "2024-06-21T09:00:00Z",
          language: "en",
          title: "Mystery outbreak",
          description: "",
          text: "Mystery outbreak",
          translated_text: null,
        },
        grounded: false,
      },
    ],
    similarities: [{ a: eventA.id, b: eventB.id, similarity: 0.82 }],
    review: null,
    ...overrides,
  };
}

export function page(items: ClusterSummary[]): ClusterPage {
  return { items, page: 1, page_size: 50, total: items.length };
}

export function sourceFlag(overrides: Partial<SourceFlagPayload> = {}): SourceFlagPayload {
  return {
    domain: "tabloid.example",
    reasons: ["flagged from review UI"],
    reviewers: ["ncdc"],
    confirmed: false,
    updated_at: "2024-06-21T12:00:00Z",
    ...overrides,
  };
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
