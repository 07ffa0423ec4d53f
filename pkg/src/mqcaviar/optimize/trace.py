from dataclasses import dataclass, field


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    best_loss: float
    mean_loss: float | None = None
    val_loss: float | None = None
    millis: float | None = None


@dataclass
class Trace:
    """Per-iteration optimizer history, indexed contiguously from 0."""

    records: list = field(default_factory=list)

    def append(self, best_loss, mean_loss=None, val_loss=None, millis=None):
        self.records.append(TraceRecord(len(self.records), best_loss, mean_loss, val_loss, millis))

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def column(self, name):
        return [getattr(r, name) for r in self.records]

    def without_timing(self):
        return Trace([TraceRecord(r.iteration, r.best_loss, r.mean_loss, r.val_loss, None) for r in self.records])
