"""Service-level errors with stable codes and HTTP mappings."""

from __future__ import annotations

_STATUS = {
    "bad-request": 400,
    "not-found": 404,
    "conflict": 409,
    "in-use": 409,
    "profile-incomplete": 409,
    "structure-immutable": 409,
    "invalid-transition": 409,
    "session-completed": 409,
    "session-expired": 410,
    "incomplete-path": 409,
    "unsupported-version": 400,
}


class ServiceError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.http_status = _STATUS.get(code, 400)

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}
