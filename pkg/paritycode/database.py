"""
Run store: manifests and reports of past runs, for lookup and replay
"""
import json
import logging
import sqlite3
from datetime import datetime, timedelta
from typing import Any, Dict, List, Optional

from paritycode.config import config

logger = logging.getLogger(__name__)


class RunStore:
    def __init__(self, db_path: str = None):
        self.db_path = db_path or config.RUN_STORE_PATH
        self.init_db()

    def get_connection(self):
        """Connection to the run store; rows come back addressable by column name"""
        conn = sqlite3.connect(self.db_path)
        conn.row_factory = sqlite3.Row
        return conn

    def init_db(self):
        """Create the runs table and its digest index if the store is new"""
        conn = self.get_connection()
        cursor = conn.cursor()

        cursor.execute('''
            CREATE TABLE IF NOT EXISTS runs (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                digest TEXT NOT NULL,
                command TEXT NOT NULL,
                manifest JSON NOT NULL,
                report TEXT NOT NULL,
                created_at DATETIME DEFAULT CURRENT_TIMESTAMP
            )
        ''')
        cursor.execute('CREATE INDEX IF NOT EXISTS idx_runs_digest ON runs(digest)')

        conn.commit()
        conn.close()

    def save_run(self, digest: str, command: str, manifest: Dict[str, Any], report: str):
        """Store a run; ``report`` is the exact JSON text that was emitted"""
        conn = self.get_connection()
        cursor = conn.cursor()

        cursor.execute('''
            INSERT INTO runs (digest, command, manifest, report)
            VALUES (?, ?, ?, ?)
        ''', (digest, command, json.dumps(manifest, sort_keys=True), report))

        conn.commit()
        conn.close()
        logger.debug(f'stored run {digest[:12]} ({command})')

    def get_run(self, digest: str) -> Optional[Dict[str, Any]]:
        """Latest run with this manifest digest (a unique prefix is enough)"""
        conn = self.get_connection()
        cursor = conn.cursor()

        cursor.execute('''
            SELECT * FROM runs
            WHERE digest LIKE ?
            ORDER BY id DESC LIMIT 1
        ''', (digest + '%',))

        row = cursor.fetchone()
        conn.close()

        if row:
            return {
                'digest': row['digest'],
                'command': row['command'],
                'manifest': json.loads(row['manifest']),
                'report': row['report'],
                'created_at': row['created_at']
            }
        return None

    def latest_runs(self, limit: int = 20, command: Optional[str] = None) -> List[Dict[str, Any]]:
        """Most recent runs, newest first"""
        conn = self.get_connection()
        cursor = conn.cursor()

        if command:
            cursor.execute('''
                SELECT digest, command, created_at FROM runs
                WHERE command = ?
                ORDER BY id DESC LIMIT ?
            ''', (command, limit))
        else:
            cursor.execute('''
                SELECT digest, command, created_at FROM runs
                ORDER BY id DESC LIMIT ?
            ''', (limit,))

        rows = cursor.fetchall()
        conn.close()

        return [dict(row) for row in rows]

    def cleanup_old_runs(self, days: int = 30) -> int:
        """Delete runs older than ``days``; returns how many went"""
        conn = self.get_connection()
        cursor = conn.cursor()

        cutoff_time = (datetime.utcnow() - timedelta(days=days)).strftime('%Y-%m-%d %H:%M:%S')
        cursor.execute('DELETE FROM runs WHERE created_at < ?', (cutoff_time,))
        removed = cursor.rowcount

        conn.commit()
        conn.close()
        return removed
