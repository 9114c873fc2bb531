"""
Event bus for game observers.

The game engine publishes phase and move events; the CLI subscribes to render
plays live and tests subscribe to inspect them.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, List, Optional


class EventType(Enum):
    """Event types published during a play."""
    GAME_STARTED = "game_started"
    PHASE_STARTED = "phase_started"
    MOVE_APPLIED = "move_applied"
    GAME_FINISHED = "game_finished"


@dataclass(frozen=True)
class Event:
    """
    A game event. `phase` is 0 before the first phase; `source` is the
    engine or the role of the mover.
    """
    event_type: EventType
    source: str
    phase: int
    data: Dict[str, Any]


Subscriber = Callable[[Event], None]


class EventBus:
    """
    Synchronous publish-subscribe bus keeping the history of one play.

    Subscriber failures are logged and never interrupt the play.
    """

    def __init__(self):
        self._subscribers: Dict[EventType, List[Subscriber]] = {}
        self._history: List[Event] = []
        self.logger = logging.getLogger(self.__class__.__name__)

    def subscribe(self, event_type: EventType, callback: Subscriber) -> None:
        self._subscribers.setdefault(event_type, []).append(callback)

    def publish(self, event: Event) -> None:
        self._history.append(event)
        for callback in self._subscribers.get(event.event_type, []):
            try:
                callback(event)
            except Exception as e:
                self.logger.error(f"Subscriber failed on {event.event_type.value} in phase {event.phase}: {e}")

    def get_history(self, event_type: Optional[EventType] = None, phase: Optional[int] = None) -> List[Event]:
        """Published events, optionally restricted to one type and one phase."""
        return [
            e
            for e in self._history
            if (event_type is None or e.event_type is event_type) and (phase is None or e.phase == phase)
        ]
