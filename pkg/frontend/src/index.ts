export { loadPlan, loadTrajectory, parseTrajectory, SchemaError,
         REQUIRED_COLUMNS } from "./schema.js";
export type { Plan, Sample, RegionGeometry } from "./schema.js";
export { renderAgentFigure, checkSamplesInWorkspace, agentIds,
         DEFAULT_OPTIONS } from "./figure.js";
export type { FigureOptions } from "./figure.js";
