"""
Protocol Audit Logger Module

Persists the frames and protocol events of simulated runs in SQLite so a run
can be replayed and its transcript digest checked after the fact.
"""

import hashlib
import json
import logging
import sqlite3
import uuid
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any

from .wire import Frame

logger = logging.getLogger(__name__)


class AuditEventType(Enum):
    """Protocol events recorded beside the frames."""

    RUN_START = "run_start"
    RUN_END = "run_end"
    ABORT = "abort"
    CROSS_CHECK = "cross_check"


class ProtocolAuditLogger:
    """
    SQLite-backed record of a protocol run.

    Frames keep their encoded bytes in send order; events carry JSON details.
    """

    def __init__(self, db_path: str | Path = "rankstat_audit.db", run_id: str | None = None):
        """
        Initialize the audit logger.

        Args:
            db_path: Path to the SQLite database file
            run_id: Identifier grouping the entries of one run
        """
        self.db_path = Path(db_path)
        self.run_id = run_id or str(uuid.uuid4())
        self._seq = 0
        self._init_database()

    def _init_database(self) -> None:
        try:
            with sqlite3.connect(self.db_path) as conn:
                cursor = conn.cursor()
                cursor.execute("""
                    CREATE TABLE IF NOT EXISTS protocol_frames (
                        id INTEGER PRIMARY KEY AUTOINCREMENT,
                        run_id TEXT NOT NULL,
                        seq INTEGER NOT NULL,
                        kind TEXT NOT NULL,
                        sender TEXT NOT NULL,
                        receivers TEXT,
                        round INTEGER NOT NULL,
                        payload_size INTEGER NOT NULL,
                        encoded BLOB NOT NULL,
                        created_at DATETIME DEFAULT CURRENT_TIMESTAMP
                    )
                """)
                cursor.execute("""
                    CREATE TABLE IF NOT EXISTS protocol_events (
                        entry_id TEXT PRIMARY KEY,
                        run_id TEXT NOT NULL,
                        event_type TEXT NOT NULL,
                        actor TEXT,
                        details TEXT,
                        timestamp TEXT NOT NULL
                    )
                """)
                cursor.execute("""
                    CREATE INDEX IF NOT EXISTS idx_protocol_frames_run
                    ON protocol_frames(run_id, seq)
                """)
                conn.commit()
        except Exception:
            logger.exception("Failed to initialize protocol audit database")
            raise

    def log_frame(self, frame: Frame) -> int | None:
        """Append one frame; returns its sequence number."""
        try:
            seq = self._seq
            with sqlite3.connect(self.db_path) as conn:
                conn.execute(
                    """
                    INSERT INTO protocol_frames
                    (run_id, seq, kind, sender, receivers, round, payload_size, encoded)
                    VALUES (?, ?, ?, ?, ?, ?, ?, ?)
                """,
                    (
                        self.run_id,
                        seq,
                        frame.kind.name,
                        frame.sender,
                        json.dumps(list(frame.receivers)),
                        frame.round,
                        len(frame.payload),
                        frame.encode(),
                    ),
                )
                conn.commit()
            self._seq += 1
            return seq
        except Exception:
            logger.exception("Failed to log frame")
            return None

    def log_event(
        self,
        event_type: AuditEventType,
        actor: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> str | None:
        entry_id = str(uuid.uuid4())
        try:
            with sqlite3.connect(self.db_path) as conn:
                conn.execute(
                    """
                    INSERT INTO protocol_events
                    (entry_id, run_id, event_type, actor, details, timestamp)
                    VALUES (?, ?, ?, ?, ?, ?)
                """,
                    (
                        entry_id,
                        self.run_id,
                        event_type.value,
                        actor,
                        json.dumps(details or {}, sort_keys=True, default=str),
                        datetime.now(timezone.utc).isoformat(),
                    ),
                )
                conn.commit()
            return entry_id
        except Exception:
            logger.exception(f"Failed to log {event_type.value} event")
            return None

    def get_frames(self, run_id: str | None = None) -> list[bytes]:
        """Encoded frames of a run in send order."""
        try:
            with sqlite3.connect(self.db_path) as conn:
                cursor = conn.execute(
                    "SELECT encoded FROM protocol_frames WHERE run_id = ? ORDER BY seq",
                    (run_id or self.run_id,),
                )
                return [bytes(row[0]) for row in cursor.fetchall()]
        except Exception:
            logger.exception("Failed to read frames")
            return []

    def get_events(
        self,
        run_id: str | None = None,
        event_type: AuditEventType | None = None,
    ) -> list[dict[str, Any]]:
        try:
            with sqlite3.connect(self.db_path) as conn:
                conn.row_factory = sqlite3.Row
                query = "SELECT * FROM protocol_events WHERE run_id = ?"
                params: list[Any] = [run_id or self.run_id]
                if event_type:
                    query += " AND event_type = ?"
                    params.append(event_type.value)
                query += " ORDER BY rowid"
                rows = conn.execute(query, params).fetchall()
                events = []
                for row in rows:
                    event = dict(row)
                    event["details"] = json.loads(event["details"] or "{}")
                    events.append(event)
                return events
        except Exception:
            logger.exception("Failed to query protocol events")
            return []

    def transcript_digest(self, run_id: str | None = None) -> str:
        """SHA-256 over the replayed frames, comparable with MessageBus.transcript_digest."""
        digest = hashlib.sha256()
        for encoded in self.get_frames(run_id):
            digest.update(encoded)
        return digest.hexdigest()
