from .base import (DEFAULT_FLOW_LIMIT, DEFAULT_QUANTUM, DROP_CODEL,
                   DROP_SHRINK, DROP_TAIL, DrrState, EnqueueOutcome,
                   FlowScheduler, FqFlowQueue)
from .cocoa import CocoaFlowState, CocoaParams, CocoaScheduler, IntervalStats
from .codel import (CODEL_INTERVAL_NS, CODEL_TARGET_NS, CodelState,
                    FqCodelScheduler, control_law)
from .fq import FqScheduler

__all__ = [
    "DEFAULT_FLOW_LIMIT", "DEFAULT_QUANTUM", "DROP_CODEL", "DROP_SHRINK",
    "DROP_TAIL", "DrrState", "EnqueueOutcome", "FlowScheduler", "FqFlowQueue",
    "CocoaFlowState", "CocoaParams", "CocoaScheduler", "IntervalStats",
    "CODEL_INTERVAL_NS", "CODEL_TARGET_NS", "CodelState", "FqCodelScheduler",
    "control_law", "FqScheduler",
]
