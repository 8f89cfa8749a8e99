/**
 * Typed HTTP client mirroring the session-service API verbatim.
 *
 *     POST /sessions                  create a session
 *     GET  /sessions/{id}             session state
 *     GET  /sessions/{id}/overlay     PNG overlay (optional ?pose= preview)
 *     PUT  /sessions/{id}/pose        validate and store a pose
 *     POST /sessions/{id}/refine      run silhouette-IoU refinement
 *     POST /sessions/{id}/save        persist an annotation record
 *
 * All UI server interaction goes through this interface, so tests can swap
 * in a mock without touching the store.
 */

import type {
  CreateSessionRequest,
  PoseParams,
  RefineResponse,
  RefinerConfigOverrides,
  SaveRequest,
  SaveResponse,
  SessionState,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export interface SessionClient {
  createSession(body: CreateSessionRequest): Promise<SessionState>;
  getSession(sessionId: string): Promise<SessionState>;
  getOverlay(sessionId: string, pose?: PoseParams): Promise<Blob>;
  putPose(sessionId: string, pose: PoseParams): Promise<{ pose: PoseParams }>;
  refine(sessionId: string, config?: RefinerConfigOverrides): Promise<RefineResponse>;
  save(sessionId: string, body?: SaveRequest): Promise<SaveResponse>;
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const data = (await response.json()) as { detail?: unknown };
    if (typeof data.detail === 'string') return data.detail;
    if (data.detail !== undefined) return JSON.stringify(data.detail);
  } catch {
    // non-JSON error body; fall through to the status line
  }
  return response.statusText || `HTTP ${response.status}`;
}

export class HttpSessionClient implements SessionClient {
  constructor(private readonly baseUrl: string = '') {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      ...init,
      headers: { 'Content-Type': 'application/json', ...init?.headers },
    });
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as T;
  }

  createSession(body: CreateSessionRequest): Promise<SessionState> {
    return this.request<SessionState>('/sessions', {
      method: 'POST',
      body: JSON.stringify(body),
    });
  }

  getSession(sessionId: string): Promise<SessionState> {
    return this.request<SessionState>(`/sessions/${sessionId}`);
  }

  async getOverlay(sessionId: string, pose?: PoseParams): Promise<Blob> {
    const query = pose === undefined
      ? ''
      : `?pose=${encodeURIComponent(JSON.stringify(pose))}`;
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/overlay${query}`);
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return response.blob();
  }

  putPose(sessionId: string, pose: PoseParams): Promise<{ pose: PoseParams }> {
    return this.request<{ pose: PoseParams }>(`/sessions/${sessionId}/pose`, {
      method: 'PUT',
      body: JSON.stringify({ pose }),
    });
  }

  refine(sessionId: string, config?: RefinerConfigOverrides): Promise<RefineResponse> {
    return this.request<RefineResponse>(`/sessions/${sessionId}/refine`, {
      method: 'POST',
      body: JSON.stringify(config ? { config } : {}),
    });
  }

  save(sessionId: string, body: SaveRequest = {}): Promise<SaveResponse> {
    return this.request<SaveResponse>(`/sessions/${sessionId}/save`, {
      method: 'POST',
      body: JSON.stringify(body),
    });
  }
}
