// Payload shapes exactly as served by the review API. The client never
// derives authoritative state from these; every decision round-trips.

export interface RawEventPayload {
  disease: string;
  location: string;
  incident: "case" | "death";
  incident_type: "new" | "total" | "unspecified";
  number: number | null;
  article_id: string;
  extractor: "qa_nli" | "llm";
  confidence: number | null;
}

export interface MappedEventPayload {
  id: string;
  raw: RawEventPayload;
  standard_disease: string;
  state: string;
  district: string;
  subdistrict: string;
  mapping_method: "table" | "llm" | "unmapped";
  international: boolean;
}

export interface ArticlePayload {
  id: string;
  url: string;
  domain: string;
  published_at: string | null;
  fetched_at: string;
  language: string;
  title: string;
  description: string;
  text: string;
  translated_text: string | null;
}

export type Decision = "shortlisted" | "rejected";

export interface ReviewPayload {
  cluster_id: string;
  decision: "pending" | Decision;
  reviewer: string;
  note: string;
  decided_at: string;
  stale: boolean;
}

export interface ClusterSummary {
  id: string;
  day: string;
  member_count: number;
  representative: MappedEventPayload;
  review: ReviewPayload | null;
}

export interface ClusterPage {
  items: ClusterSummary[];
  page: number;
  page_size: number;
  total: number;
}

export interface ClusterMember {
  event: MappedEventPayload;
  article: ArticlePayload;
  grounded: boolean | null;
}

export interface SimilarityEdge {
  a: string;
  b: string;
  similarity: number;
}

export interface ClusterDetail {
  id: string;
  day: string;
  representative_id: string;
  members: ClusterMember[];
  similarities: SimilarityEdge[];
  review: ReviewPayload | null;
}

export interface SourceFlagPayload {
  domain: string;
  reasons: string[];
  reviewers: string[];
  confirmed: boolean;
  updated_at: string;
}

export interface StatsPayload {
  articles: number;
  raw_events: number;
  mapped_events: number;
  clusters: number;
  shortlisted: number;
}
