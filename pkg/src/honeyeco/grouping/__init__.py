"""Actor grouping by shared command clusters and goal inference."""

from .goals import GoalRules, GoalStateMachine, build_state_machine, load_goal_rules, map_goals
from .patterns import ActorProfile, Pattern, UnassignedCommandError, build_profiles, mine_patterns
from .report import Report, build_report, top_commands, top_credentials, write_report

__all__ = [
    "ActorProfile",
    "GoalRules",
    "GoalStateMachine",
    "Pattern",
    "Report",
    "UnassignedCommandError",
    "build_profiles",
    "build_report",
    "build_state_machine",
    "load_goal_rules",
    "map_goals",
    "mine_patterns",
    "top_commands",
    "top_credentials",
    "write_report",
]
