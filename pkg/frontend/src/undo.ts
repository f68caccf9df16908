// Minimal undo/redo stack over inverse-action pairs.

export interface Action {
  undo: () => Promise<void> | void;
  redo: () => Promise<void> | void;
  label: string;
}

export class UndoStack {
  private actions: Action[] = [];
  private cursor = -1; // index of the last applied action

  push(action: Action): void {
    this.actions.splice(this.cursor + 1);
    this.actions.push(action);
    this.cursor = this.actions.length - 1;
  }

  get canUndo(): boolean {
    return this.cursor >= 0;
  }

  get canRedo(): boolean {
    return this.cursor < this.actions.length - 1;
  }

  get labels(): string[] {
    return this.actions.slice(0, this.cursor + 1).map((a) => a.label);
  }

  async undo(): Promise<void> {
    if (!this.canUndo) return;
    await this.actions[this.cursor].undo();
    this.cursor -= 1;
  }

  async redo(): Promise<void> {
    if (!this.canRedo) return;
    await this.actions[this.cursor + 1].redo();
    this.cursor += 1;
  }

  clear(): void {
    this.actions = [];
    this.cursor = -1;
  }
}
