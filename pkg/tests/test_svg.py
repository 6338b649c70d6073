import xml.etree.ElementTree as ET

import numpy as np
import pytest

from qhgeom.errors import InvalidInputError
from qhgeom.svg import render_svg

NS = "{http://www.w3.org/2000/svg}"


def test_empty_input_gives_valid_svg():
    root = ET.fromstring(render_svg([]))
    assert root.tag == NS + "svg"
    assert root.get("viewBox") == "0 0 800 800"
    assert not root.findall(NS + "path")


def test_one_path_per_polyline_and_crosses_for_punctures():
    t = np.linspace(0, 2 * np.pi, 50)
    circles = [np.c_[r * np.cos(t), r * np.sin(t)] for r in (1.0, 2.0)]
    root = ET.fromstring(render_svg(circles, punctures=[(0.0, 0.0)], labels=["a", "b"]))
    assert len(root.findall(NS + "path")) == 2
    assert len(root.findall(NS + "line")) == 2


def test_output_is_deterministic():
    rng = np.random.default_rng(3)
    polys = [rng.normal(size=(20, 2)) for _ in range(3)]
    assert render_svg(polys) == render_svg([p.copy() for p in polys])


def test_coordinates_stay_in_the_view_box():
    svg = render_svg([np.array([[-5.0, 1.0], [7.0, 3.0], [0.0, -2.0]])])
    d = ET.fromstring(svg).find(NS + "path").get("d")
    nums = [float(v) for v in d.replace("M", " ").replace("L", " ").replace("Z", " ").replace(",", " ").split()]
    assert min(nums) >= 40 - 1e-9 and max(nums) <= 760 + 1e-9


def test_non_planar_input_is_rejected():
    with pytest.raises(InvalidInputError):
        render_svg([np.zeros((4, 3))])
