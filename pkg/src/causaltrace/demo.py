"""A small instrumented program: a main loop, a ps command, two test
coroutines and a deployment branch, all marked with signposts."""

from __future__ import annotations

from .proper_time import TimestampContext
from .signpost import Tracer

DEMO_PROCESS = "myApp_name21.2.3"
DEMO_PID = "17778"
FIXED_TIMESTAMP = TimestampContext.parse("2019-06-03 13:40:04 +0200 CEST")


def run_demo(fixed_timestamps: bool = False) -> Tracer:
    """Run the scripted program and return its tracer (journal + clock)."""
    stamps = (lambda: FIXED_TIMESTAMP) if fixed_timestamps else TimestampContext.now
    t = Tracer(DEMO_PROCESS, DEMO_PID, timestamps=stamps)

    t.signpost("MainLoop start").part_of("main", "function")
    (
        t.signpost("Beginning of test code")
        .remark("Start process")
        .part_of("cellibrium", "go package")
        .note("example code")
        .remark("look up a name")
    )
    (
        t.signpost("code signpost X")
        .intent("open file X")
        .relies_on("/etc/passed", "file")
        .relies_on("123.456.789.123", "dns lookup")
        .note("xxx")
        .part_of("main", "coroutine")
    )

    # both test coroutines are launched from "code signpost X"
    test1 = t.fork()
    testing = t.fork()

    ps = t.signpost("Run ps command")
    suite = t.signpost("TEST1---------", lane=test1)
    ps.note("/bin/ps -eo user,pcpu,pmem,vsz,stime,etime,time,args")
    (
        suite.note("Testing suite 1")
        .intent("read whole file of data")
        .relies_on("file://URI", "file")
        .failed_because("file read failed")
        .attribute("open file://URI: no such file or directory", "system error message")
    )
    ps.remark("Finished ps command")

    (
        t.signpost("Commence testing", lane=testing)
        .remark("Possibly anomalous CPU spike for this virtual CPU")
        .attribute("CPU 22117.000000 > average 22115.000000", "anomalous CPU spike")
    )
    deploy = t.fork(testing)
    finish = t.fork(testing)

    t.signpost("A sideline to test some raw concept mapping", lane=testing).note("Commence testing")
    t.signpost("End of sideline concept test", lane=testing).note("Commence testing")

    (
        t.signpost("Starting Kubernetes deployment", lane=deploy)
        .note("Commence testing")
        .remark("Starting kubernetes pod")
        .remark("File drop in pipeline")
        .remark("Querying data model")
        .remark("Submit transformation result")
    )
    t.signpost("The end!", lane=finish)
    t.signpost("Show the signposts", lane=finish)
    return t
