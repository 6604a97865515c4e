"""Text-format round trips, JSON stability, and the exit-code contract."""

import json

import pytest

from finsite import fixtures
from finsite.cli import main
from finsite.fileformat import (ParseError, ValidationError, parse_document,
                                parse_site, print_site)


def fixture_path(name):
    from importlib import resources
    return str(resources.files("finsite") / "fixtures" / name)


def test_round_trip_all_fixtures():
    for name in fixtures.SITE_NAMES:
        site = fixtures.load_site(name)
        assert parse_site(print_site(site)) == site, name


def test_parse_point_from_minimal_text():
    site = parse_site("object X\ncover X <- [id_X]\n")
    assert site.cat.n_objects == 1 and site.cat.n_morphisms == 1


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as err:
        parse_site("object X\narrow f : X -> Y\ncover X <- [id_X]")
    assert err.value.line >= 1
    with pytest.raises(ParseError):
        parse_site("arrow f X to Y")


def test_validation_error_for_missing_terminal_cover():
    with pytest.raises(ValidationError) as err:
        parse_site("object X")
    assert any("identity family" in v for v in err.value.violations)


def test_explicit_category_with_compose_facts():
    text = """
object x
object y
object z
arrow f : x -> y
arrow q : y -> z
arrow h : x -> z
compose q . f = h
cover z <- [id_z]
"""
    site = parse_site(text)
    assert site.cat.comp[4][3] == 5  # q ∘ f = h
    assert parse_site(print_site(site)) == site


def test_lattice_document_parses():
    with open(fixture_path("diamond.lat")) as handle:
        lat, prescribed = parse_document(handle.read())
    assert lat.n == 4
    assert prescribed == ((1, 2),)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


def test_check_exit_codes(capsys, tmp_path):
    code, _ = run_cli(capsys, "check", fixture_path("diamond.site"))
    assert code == 0
    bad = tmp_path / "bad.site"
    bad.write_text("object X\ncover Y <- []\n")
    code = main(["check", str(bad)])
    capsys.readouterr()
    assert code == 3


def test_separate_returns_witness_and_exit_one(capsys):
    code, out = run_cli(capsys, "separate", fixture_path("diamond.site"),
                        "--object", "1", "--u", "a", "--v", "b",
                        "--budget", "32", "--json")
    assert code == 1
    document = json.loads(out)
    assert document["command"] == "separate"
    assert document["result"]["verdict"] == "WITNESS"
    assert document["witnesses"][0]["carriers"] == {"0": 0, "1": 1, "a": 1, "b": 0}


def test_separate_contained_exit_zero(capsys):
    code, _ = run_cli(capsys, "separate", fixture_path("diamond.site"),
                      "--object", "1", "--u", "0", "--v", "a")
    assert code == 0


def test_saturate_json_stable_across_runs(capsys):
    code1, out1 = run_cli(capsys, "saturate", fixture_path("point.site"), "--json")
    code2, out2 = run_cli(capsys, "saturate", fixture_path("point.site"), "--json")
    assert code1 == code2 == 0
    assert out1 == out2
    document = json.loads(out1)
    assert set(document) == {"command", "input_digest", "result",
                             "witnesses", "timings"}
    assert len(document["result"]["sieves"]["star"]) == 1


def test_models_subcommand_count(capsys):
    code, out = run_cli(capsys, "models", fixture_path("diamond.site"),
                        "--bound", "1", "--json")
    assert code == 0
    assert json.loads(out)["result"]["count"] == 3


def test_chase_budget_exit_two(capsys):
    code, _ = run_cli(capsys, "chase", fixture_path("diamond.site"),
                      "--root", "1", "--budget", "1")
    assert code == 2
    code, out = run_cli(capsys, "chase", fixture_path("diamond.site"),
                        "--root", "1", "--json")
    assert code == 0
    assert json.loads(out)["result"]["status"] == "STABILIZED"


def test_chase_choices_strategy(capsys):
    code, out = run_cli(capsys, "chase", fixture_path("diamond.site"),
                        "--root", "1", "--strategy", "choices=0,1,0,0,0", "--json")
    assert code == 0
    assert json.loads(out)["result"]["status"] == "DEAD"


def test_sheafify_subcommand(capsys):
    code, out = run_cli(capsys, "sheafify", fixture_path("diamond.site"),
                        "--object", "1", "--json")
    assert code == 0
    assert json.loads(out)["result"]["sheaf"]["carriers"] \
        == {"0": 1, "1": 1, "a": 1, "b": 1}


def test_factor_subcommand(capsys):
    code, out = run_cli(capsys, "factor", fixture_path("diamond.site"),
                        "--source", "a", "--target", "1", "--json")
    assert code == 0
    entries = json.loads(out)["result"]["transformations"]
    assert entries == [{"components": {"0": [0], "1": [], "a": [0], "b": []},
                        "family": ["id_a"], "arrows": ["a_to_1"]}]


def test_lattice_embed_subcommand(capsys):
    code, out = run_cli(capsys, "lattice-embed", fixture_path("diamond.lat"),
                        "--json")
    assert code == 0
    document = json.loads(out)
    assert set(document["result"]["embeddings"]) == {"birkhoff", "models"}


def test_lattice_embed_rejects_m3(capsys, tmp_path):
    text = """lattice {
  elements: bot x y z top
  bot < x  bot < y  bot < z
  x < top  y < top  z < top
}
"""
    path = tmp_path / "m3.lat"
    path.write_text(text)
    code, out = run_cli(capsys, "lattice-embed", str(path), "--json")
    assert code == 1
    assert json.loads(out)["result"]["verdict"] == "NON_DISTRIBUTIVE"


def test_delta_and_eta_check_subcommands(capsys):
    code, out = run_cli(capsys, "delta-check", fixture_path("diamond.site"),
                        "--bound", "1", "--json")
    assert code == 0
    assert json.loads(out)["result"]["all_isomorphisms"] is True
    code, out = run_cli(capsys, "eta-check", fixture_path("diamond.site"),
                        "--bound", "1", "--json")
    assert code == 0
    assert json.loads(out)["result"]["all_pass"] is True


def test_missing_file_exit_three(capsys):
    assert main(["check", "/nonexistent/site.site"]) == 3
    capsys.readouterr()
