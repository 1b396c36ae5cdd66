import type {
  AlignmentSpec,
  BoardRole,
  BoardSummary,
  Corner,
} from "./types.js";

export const CORNERS: Corner[] = ["BL", "BR", "TL", "TR"];

type Pick =
  | { kind: "corner"; corner: Corner }
  | { kind: "footprint"; ref: string };

/** Two-click alignment reference picker. One pick per board; a spec only
 * materializes once the pair is consistent (same corner on both, or a
 * footprint on each). */
export class AlignmentPicker {
  private picks: Record<BoardRole, Pick | null> = { old: null, new: null };

  constructor(
    private oldSummary: BoardSummary | null = null,
    private newSummary: BoardSummary | null = null,
  ) {}

  setSummary(role: BoardRole, summary: BoardSummary | null): void {
    if (role === "old") {
      this.oldSummary = summary;
    } else {
      this.newSummary = summary;
    }
    // picks referencing a replaced board are stale
    this.picks[role] = null;
  }

  /** Picking is possible only with both boards loaded. */
  get enabled(): boolean {
    return this.oldSummary !== null && this.newSummary !== null;
  }

  pickCorner(role: BoardRole, corner: Corner): void {
    if (!this.enabled || !CORNERS.includes(corner)) {
      return;
    }
    this.picks[role] = { kind: "corner", corner };
  }

  pickFootprint(role: BoardRole, ref: string): void {
    if (!this.enabled) {
      return;
    }
    const summary = role === "old" ? this.oldSummary : this.newSummary;
    if (!summary || !summary.footprintRefs.includes(ref)) {
      return;
    }
    this.picks[role] = { kind: "footprint", ref };
  }

  clear(): void {
    this.picks = { old: null, new: null };
  }

  /** Label for the current pick on one board, or null when unset. */
  describe(role: BoardRole): string | null {
    const pick = this.picks[role];
    if (pick === null) {
      return null;
    }
    return pick.kind === "corner"
      ? `corner ${pick.corner}`
      : `footprint ${pick.ref}`;
  }

  /** The spec the two picks define, or null while incomplete or mixed. */
  spec(): AlignmentSpec | null {
    const a = this.picks.old;
    const b = this.picks.new;
    if (a === null || b === null) {
      return null;
    }
    if (a.kind === "corner" && b.kind === "corner") {
      return a.corner === b.corner
        ? { mode: "bboxCorner", corner: a.corner }
        : null;
    }
    if (a.kind === "footprint" && b.kind === "footprint") {
      return { mode: "footprintCenter", refOld: a.ref, refNew: b.ref };
    }
    return null;
  }
}
