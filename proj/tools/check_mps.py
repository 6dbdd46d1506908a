#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Solve an MPS file with HiGHS and print the optimum.

Output: "<status> <objective> <columns> <rows>". Exit 77 when highspy is
not installed, 1 when the model has no optimum.
"""
import sys

try:
    import highspy
except ImportError:
    print("highspy not available", file=sys.stderr)
    sys.exit(77)


def main(path):
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 0.0)
    status = h.readModel(path)
    if status != highspy.HighsStatus.kOk:
        print("cannot read " + path, file=sys.stderr)
        return 1
    h.run()
    lp = h.getLp()
    model_status = h.getModelStatus()
    name = h.modelStatusToString(model_status)
    obj = h.getInfo().objective_function_value
    print(f"{name} {obj!r} {lp.num_col_} {lp.num_row_}")
    return 0 if model_status == highspy.HighsModelStatus.kOptimal else 1


if __name__ == "__main__":
    if len(sys.argv) != 2:
        print("usage: check_mps.py model.mps", file=sys.stderr)
        sys.exit(2)
    sys.exit(main(sys.argv[1]))
