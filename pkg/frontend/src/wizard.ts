// Guided decision-map creation: checklist-driven forms, the decision-graph
// stepper for impact levels, and suggestion review. The wizard computes no
// impact level itself: every level comes from the guidance endpoint, and
// every accepted suggestion maps to a concrete document edit that is sent
// to the service with PUT.

import type { GraphStep, Suggestion } from "./types.js";

const ESCAPES: Record<string, string> = {
  "\\": "\\\\",
  '"': '\\"',
  "\n": "\\n",
  "\t": "\\t",
};

export function quote(text: string): string {
  let out = '"';
  for (const ch of text) {
    out += ESCAPES[ch] ?? ch;
  }
  return out + '"';
}

export type Dimension = "technical" | "economic" | "social" | "environmental";
export type ConcernKeyword = "qa" | "requirement";
export type EffectTypeName = "positive" | "negative" | "undecided";

export interface DraftFeature {
  id: string;
  name: string;
  variants: Array<{ id: string; name: string }>;
  realizedBy: string[];
}

export interface DraftConcern {
  keyword: ConcernKeyword;
  id: string;
  name: string;
  dimension: Dimension;
  impact: string; // always the engine's answer, never computed locally
}

export interface DraftEffect {
  source: string;
  target: string;
  effectType: EffectTypeName;
  label?: string;
}

export interface DraftGoal {
  id: string;
  statement: string;
  concerns: string[];
}

/** Decision-map document under construction; render() emits DSL text. */
export class DmDraft {
  meta: Array<[string, string]> = [];
  features: DraftFeature[] = [];
  concerns: DraftConcern[] = [];
  effects: DraftEffect[] = [];
  goals: DraftGoal[] = [];

  constructor(
    public id: string,
    public title: string,
    public systemName: string,
  ) {}

  addFeature(id: string, name: string): DraftFeature {
    const feature: DraftFeature = { id, name, variants: [], realizedBy: [] };
    this.features.push(feature);
    return feature;
  }

  addConcern(
    keyword: ConcernKeyword,
    id: string,
    name: string,
    dimension: Dimension,
    impact: string,
  ): void {
    this.concerns.push({ keyword, id, name, dimension, impact });
  }

  addEffect(source: string, target: string, effectType: EffectTypeName, label?: string): void {
    this.effects.push({ source, target, effectType, label });
  }

  addGoal(id: string, statement: string, concerns: string[] = []): void {
    this.goals.push({ id, statement, concerns });
  }

  setMeta(key: string, value: string): void {
    const existing = this.meta.find(([k]) => k === key);
    if (existing) {
      existing[1] = value;
    } else {
      this.meta.push([key, value]);
    }
  }

  /** Resolve an undecided effect in place, or record a fresh one. */
  applySuggestion(suggestion: Suggestion): void {
    const existing = this.effects.find(
      (e) =>
        e.source === suggestion.source_qa &&
        e.target === suggestion.target_qa &&
        e.effectType === "undecided",
    );
    if (existing) {
      existing.effectType = suggestion.suggested_type;
    } else {
      this.effects.push({
        source: suggestion.source_qa,
        target: suggestion.target_qa,
        effectType: suggestion.suggested_type,
      });
    }
  }

  render(): string {
    const lines = [`decision_map ${this.id} ${quote(this.title)} system ${quote(this.systemName)} {`];
    for (const [key, value] of this.meta) {
      lines.push(`  meta ${quote(key)} ${quote(value)}`);
    }
    for (const feature of this.features) {
      const head = `  feature ${feature.id} ${quote(feature.name)}`;
      if (feature.variants.length === 0 && feature.realizedBy.length === 0) {
        lines.push(head);
        continue;
      }
      lines.push(head + " {");
      for (const variant of feature.variants) {
        lines.push(`    variant ${variant.id} ${quote(variant.name)}`);
      }
      if (feature.realizedBy.length > 0) {
        lines.push(`    realized_by ${feature.realizedBy.join(" ")}`);
      }
      lines.push("  }");
    }
    for (const concern of this.concerns) {
      lines.push(
        `  ${concern.keyword} ${concern.id} ${quote(concern.name)}` +
          ` dimension ${concern.dimension} impact ${concern.impact}`,
      );
    }
    for (const effect of this.effects) {
      let line = `  effect ${effect.source} -> ${effect.target} ${effect.effectType}`;
      if (effect.label !== undefined) {
        line += ` label ${quote(effect.label)}`;
      }
      lines.push(line);
    }
    for (const goal of this.goals) {
      let line = `  goal ${goal.id} ${quote(goal.statement)}`;
      if (goal.concerns.length > 0) {
        line += ` concerns ${goal.concerns.join(" ")}`;
      }
      lines.push(line);
    }
    lines.push("}");
    return lines.join("\n") + "\n";
  }

  toJSON(): unknown {
    return {
      id: this.id,
      title: this.title,
      systemName: this.systemName,
      meta: this.meta,
      features: this.features,
      concerns: this.concerns,
      effects: this.effects,
      goals: this.goals,
    };
  }

  static fromJSON(raw: any): DmDraft {
    const draft = new DmDraft(raw.id, raw.title, raw.systemName);
    draft.meta = raw.meta ?? [];
    draft.features = raw.features ?? [];
    draft.concerns = raw.concerns ?? [];
    draft.effects = raw.effects ?? [];
    draft.goals = raw.goals ?? [];
    return draft;
  }
}

/** Asks the guidance engine for the next step given the answers so far. */
export type GraphStepper = (answers: string[]) => Promise<GraphStep>;

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export interface StepperState {
  concern: {
    keyword: ConcernKeyword;
    id: string;
    name: string;
    dimension: Dimension;
  } | null;
  answers: string[];
  question: string | null;
}

export type SuggestionMark = "pending" | "accepted" | "rejected";

export interface SuggestionEntry {
  suggestion: Suggestion;
  mark: SuggestionMark;
}

const STORAGE_KEY = "saf.wizard.session";

/**
 * Wizard session: draft document + in-flight decision-graph stepper +
 * suggestion review marks. State persists through the injected storage so an
 * interrupted session resumes where it left off.
 */
export class WizardSession {
  stepper: StepperState = { concern: null, answers: [], question: null };
  suggestions: SuggestionEntry[] = [];

  constructor(
    public draft: DmDraft,
    private readonly stepGraph: GraphStepper,
    private readonly storage?: StorageLike,
  ) {}

  static resume(stepGraph: GraphStepper, storage: StorageLike): WizardSession | null {
    const raw = storage.getItem(STORAGE_KEY);
    if (raw === null) {
      return null;
    }
    const payload = JSON.parse(raw);
    const session = new WizardSession(DmDraft.fromJSON(payload.draft), stepGraph, storage);
    session.stepper = payload.stepper;
    session.suggestions = payload.suggestions ?? [];
    return session;
  }

  persist(): void {
    this.storage?.setItem(
      STORAGE_KEY,
      JSON.stringify({
        draft: this.draft.toJSON(),
        stepper: this.stepper,
        suggestions: this.suggestions,
      }),
    );
  }

  clearPersisted(): void {
    this.storage?.removeItem(STORAGE_KEY);
  }

  /** Open the impact-level stepper for a new concern. */
  async beginConcern(
    keyword: ConcernKeyword,
    id: string,
    name: string,
    dimension: Dimension,
  ): Promise<string | null> {
    this.stepper = { concern: { keyword, id, name, dimension }, answers: [], question: null };
    return this.advance();
  }

  /** Feed one yes/no answer to the engine; returns the question still open, or
   * null once the concern has been placed. */
  async answer(value: "yes" | "no"): Promise<string | null> {
    if (this.stepper.concern === null) {
      throw new Error("no concern is being classified");
    }
    this.stepper.answers.push(value);
    return this.advance();
  }

  private async advance(): Promise<string | null> {
    const step = await this.stepGraph(this.stepper.answers);
    if (step.level !== undefined) {
      const concern = this.stepper.concern!;
      this.draft.addConcern(concern.keyword, concern.id, concern.name, concern.dimension, step.level);
      this.stepper = { concern: null, answers: [], question: null };
      this.persist();
      return null;
    }
    this.stepper.question = step.next_question ?? null;
    this.persist();
    return this.stepper.question;
  }

  loadSuggestions(suggestions: Suggestion[]): void {
    this.suggestions = suggestions.map((suggestion) => ({ suggestion, mark: "pending" }));
    this.persist();
  }

  /** Accepted suggestions become document edits and leave the panel. */
  accept(suggestion: Suggestion): void {
    this.mark(suggestion, "accepted");
    this.draft.applySuggestion(suggestion);
    this.persist();
  }

  reject(suggestion: Suggestion): void {
    this.mark(suggestion, "rejected");
    this.persist();
  }

  private mark(suggestion: Suggestion, mark: SuggestionMark): void {
    for (const entry of this.suggestions) {
      if (
        entry.suggestion.source_qa === suggestion.source_qa &&
        entry.suggestion.target_qa === suggestion.target_qa &&
        entry.suggestion.matrix_id === suggestion.matrix_id
      ) {
        entry.mark = mark;
      }
    }
  }

  /** What the suggestion panel still shows. */
  pendingSuggestions(): Suggestion[] {
    return this.suggestions.filter((e) => e.mark === "pending").map((e) => e.suggestion);
  }
}
