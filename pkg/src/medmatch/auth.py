"""Login stub: salted password hashes and expiring bearer tokens.

Deliberately minimal; a fronting proxy is assumed for transport
security.  Credential checks are constant-time and return one opaque
error for both unknown users and wrong passwords.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import secrets
import time
from dataclasses import dataclass
from pathlib import Path

ROLES = ("patient", "provider_admin", "analyst")
PBKDF2_ITERATIONS = 50_000


class AuthError(Exception):
    pass


def _derive(password: str, salt: bytes) -> bytes:
    return hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, PBKDF2_ITERATIONS)


def hash_password(password: str, salt: bytes | None = None) -> tuple[str, str]:
    """Returns (salt_hex, hash_hex) for storage."""
    salt = salt if salt is not None else secrets.token_bytes(16)
    return salt.hex(), _derive(password, salt).hex()


@dataclass(frozen=True)
class User:
    username: str
    salt: str
    password_hash: str
    role: str


class CredentialStore:
    def __init__(self, users: list[User] | None = None):
        self._users: dict[str, User] = {}
        for user in users or []:
            self.add(user)
        # dummy digest keeps verification time flat for unknown usernames
        self._dummy_salt = secrets.token_bytes(16)
        self._dummy_hash = _derive("?", self._dummy_salt)

    def add(self, user: User) -> None:
        if user.role not in ROLES:
            raise AuthError(f"unknown role {user.role!r}")
        if user.username in self._users:
            raise AuthError(f"duplicate username {user.username!r}")
        self._users[user.username] = user

    def add_user(self, username: str, password: str, role: str) -> None:
        salt, digest = hash_password(password)
        self.add(User(username, salt, digest, role))

    def verify(self, username: str, password: str) -> str:
        """Returns the role, or raises one opaque error."""
        user = self._users.get(username)
        if user is None:
            hmac.compare_digest(_derive(password, self._dummy_salt), self._dummy_hash)
            raise AuthError("invalid credentials")
        derived = _derive(password, bytes.fromhex(user.salt))
        if not hmac.compare_digest(derived, bytes.fromhex(user.password_hash)):
            raise AuthError("invalid credentials")
        return user.role

    def save(self, path: str | Path) -> None:
        doc = [
            {"username": u.username, "salt": u.salt, "hash": u.password_hash, "role": u.role}
            for u in self._users.values()
        ]
        Path(path).write_text(json.dumps(doc, indent=2), encoding="utf-8")

    @classmethod
    def from_file(cls, path: str | Path) -> "CredentialStore":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        users = [User(e["username"], e["salt"], e["hash"], e["role"]) for e in doc]
        return cls(users)


@dataclass
class Session:
    username: str
    role: str
    expires_at: float


class TokenStore:
    """In-memory bearer tokens with a fixed time-to-live."""

    def __init__(self, ttl_seconds: float = 3600.0, clock=time.monotonic):
        self.ttl_seconds = ttl_seconds
        self.clock = clock
        self._sessions: dict[str, Session] = {}

    def issue(self, username: str, role: str) -> str:
        token = secrets.token_hex(16)
        self._sessions[token] = Session(username, role, self.clock() + self.ttl_seconds)
        return token

    def check(self, token: str) -> Session:
        session = self._sessions.get(token)
        if session is None:
            raise AuthError("invalid token")
        if self.clock() > session.expires_at:
            del self._sessions[token]
            raise AuthError("token expired")
        return session
