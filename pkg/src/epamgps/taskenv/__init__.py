from .parser import (
    BUILTINS,
    TaskDefinition,
    builtin,
    builtin_path,
    load_task,
    parse_task,
    render_task,
)
from .sexpr import SourceSpan, TaskSyntaxError
