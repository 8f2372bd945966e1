// Thin client over the retrieval service. All similarity computation stays
// on the server; this module only moves documents.

import type {
  DescriptionDoc,
  PaletteShape,
  QueryResponse,
  SegmentedImageDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function readError(response: Response): Promise<ApiError> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // keep the status text
  }
  return new ApiError(response.status, detail);
}

export class ServiceClient {
  constructor(private baseUrl: string) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`);
    if (!response.ok) throw await readError(response);
    return (await response.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw await readError(response);
    return (await response.json()) as T;
  }

  async health(): Promise<{ status: string; images: number; descriptions: number }> {
    return this.getJson("/health");
  }

  async shapes(): Promise<PaletteShape[]> {
    const body = await this.getJson<{ shapes: PaletteShape[] }>("/shapes");
    return body.shapes;
  }

  async echoDescription(doc: DescriptionDoc): Promise<string> {
    const response = await fetch(`${this.baseUrl}/descriptions/echo`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(doc),
    });
    if (!response.ok) throw await readError(response);
    return await response.text();
  }

  async query(doc: DescriptionDoc, persist = false): Promise<QueryResponse> {
    return this.postJson("/query", { description: doc, persist });
  }

  async image(imageId: string): Promise<SegmentedImageDoc> {
    return this.getJson(`/images/${encodeURIComponent(imageId)}`);
  }

  async ingestImage(doc: SegmentedImageDoc): Promise<{ image_id: string; links: string[] }> {
    return this.postJson("/images", doc);
  }
}
