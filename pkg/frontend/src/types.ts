/**
 * Shared types mirroring the session-service JSON API, plus client-side
 * pose validation and the per-parameter control metadata.
 */

export const POSE_FIELDS = [
  'azimuth_deg',
  'elevation_deg',
  'inplane_deg',
  'depth',
  'focal',
  'principal_u',
  'principal_v',
] as const;

export type PoseField = (typeof POSE_FIELDS)[number];

export interface PoseParams {
  azimuth_deg: number;
  elevation_deg: number;
  inplane_deg: number;
  depth: number;
  focal: number;
  principal_u: number;
  principal_v: number;
}

export interface SessionState {
  session_id: string;
  image_path: string;
  mesh_path: string;
  width: number;
  height: number;
  pose: PoseParams;
  has_reference: boolean;
  stage: 'human' | 'refined';
  dirty: boolean;
}

export interface InstanceMaskRef {
  path: string;
  confidence?: number;
}

export interface CreateSessionRequest {
  image_path: string;
  mesh_path: string;
  initial_pose?: PoseParams;
  semantic_mask_path?: string;
  instance_masks?: InstanceMaskRef[];
}

export interface RefinerConfigOverrides {
  epsilon?: number[];
  alpha0?: number;
  alpha_threshold?: number;
  max_sweeps?: number;
}

export interface RefineResponse {
  pose: PoseParams;
  iou_initial: number;
  iou_final: number;
  sweeps: number;
  evaluations: number;
  converged: boolean;
  trajectory: [number, number][];
}

export interface SaveRequest {
  category?: string;
  stage?: 'human' | 'refined';
}

export interface SaveResponse {
  record: Record<string, unknown>;
  path: string;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/** Returns an error message, or null when the value is acceptable. */
export function validateFieldValue(field: PoseField, value: number): string | null {
  if (!Number.isFinite(value)) {
    return 'must be a finite number';
  }
  if (field === 'depth' && value <= 0) {
    return 'depth must be positive';
  }
  if (field === 'focal' && value <= 0) {
    return 'focal length must be positive';
  }
  if (field === 'elevation_deg' && (value < -90 || value > 90)) {
    return 'elevation must lie in [-90, 90]';
  }
  return null;
}

// ---------------------------------------------------------------------------
// Control metadata
// ---------------------------------------------------------------------------

export interface ParamMeta {
  label: string;
  unit: string;
  /** Default slider range; depth/focal/principal ranges are rescaled per session. */
  min: number;
  max: number;
  coarseStep: number;
  fineStep: number;
  decimals: number;
}

export const PARAM_META: Record<PoseField, ParamMeta> = {
  azimuth_deg: { label: 'Azimuth', unit: '°', min: 0, max: 360, coarseStep: 5, fineStep: 0.5, decimals: 1 },
  elevation_deg: { label: 'Elevation', unit: '°', min: -90, max: 90, coarseStep: 2, fineStep: 0.25, decimals: 2 },
  inplane_deg: { label: 'In-plane', unit: '°', min: -180, max: 180, coarseStep: 2, fineStep: 0.25, decimals: 2 },
  depth: { label: 'Depth', unit: '', min: 0.1, max: 20, coarseStep: 0.1, fineStep: 0.01, decimals: 3 },
  focal: { label: 'Focal', unit: 'px', min: 50, max: 4000, coarseStep: 20, fineStep: 2, decimals: 1 },
  principal_u: { label: 'Principal u', unit: 'px', min: 0, max: 1280, coarseStep: 5, fineStep: 1, decimals: 1 },
  principal_v: { label: 'Principal v', unit: 'px', min: 0, max: 960, coarseStep: 5, fineStep: 1, decimals: 1 },
};
