"""Shared helpers for the experiment scripts."""
import argparse
import os

from usc_laser.records import map_record, write_csv, write_json
from usc_laser.svg import heatmap_svg, render_svg


def parser(description, out):
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--out", default=out, help="output directory")
    return ap


def save_map(result, out, stem, title):
    os.makedirs(out, exist_ok=True)
    rec = map_record(result)
    write_csv(rec, os.path.join(out, stem + ".csv"))
    write_json(rec, os.path.join(out, stem + ".json"))
    render_svg(heatmap_svg(result, title), os.path.join(out, stem + ".svg"))
