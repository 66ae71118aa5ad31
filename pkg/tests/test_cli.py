"""
CLI entry point tests for dga_detector.

This module tests:
- Argument parsing, help and version flags
- Each subcommand's stdout format
- Exit codes for success, expected errors and interrupts
- Loading of .env settings
"""

import subprocess
import sys
from pathlib import Path
from unittest.mock import patch

import pytest

from dga_detector import __version__
from dga_detector.cli import EXIT_ERROR, EXIT_INTERRUPTED, EXIT_OK, build_parser, main


@pytest.fixture(autouse=True)
def no_dotenv():
    """
    Keep a developer's .env file out of CLI tests.

    Yields:
        Mock: the patched load_dotenv
    """
    with patch("dga_detector.cli.load_dotenv") as mock_load_dotenv:
        yield mock_load_dotenv


@pytest.fixture
def trained_model(synthetic_fixture, tmp_path, reference_date, isolated_env):
    """
    Train a tiny model through the CLI and return its path.

    Args:
        synthetic_fixture: Paths of the synthetic fixture files
        tmp_path: pytest's temporary directory
        reference_date: Snapshot reference date
        isolated_env: monkeypatch with DGA_* variables cleared
    """
    for key, value in {"EPOCHS": "2", "HIDDEN_SIZE": "4", "BATCH_SIZE": "8"}.items():
        isolated_env.setenv(f"DGA_{key}", value)
    out = tmp_path / "model.txt"
    code = main(
        [
            "train",
            "--dataset", str(synthetic_fixture.dataset),
            "--suffix-list", str(synthetic_fixture.suffixes),
            "--whois-snapshot", str(synthetic_fixture.whois),
            "--out", str(out),
            "--reference-date", reference_date.isoformat(),
        ]
    )  # fmt: skip
    assert code == EXIT_OK
    return out


def test_cli_main_function_exists():
    """
    Test that the CLI main function exists and is callable.
    """
    assert callable(main)


def test_cli_loads_dotenv(no_dotenv, suffix_file):
    """
    Test that the CLI loads environment variables from a .env file.

    Args:
        no_dotenv: The patched load_dotenv
        suffix_file: Suffix list written to a temporary file
    """
    main(["parse", "example.com", "--suffix-list", str(suffix_file)])
    no_dotenv.assert_called_once()


def test_version_flag(capsys):
    """
    Test that --version prints the package version and exits 0.

    Args:
        capsys: pytest fixture to capture stdout/stderr
    """
    with pytest.raises(SystemExit) as exc_info:
        main(["--version"])
    assert exc_info.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_subcommand_is_required():
    """
    Test that running without a subcommand is a usage error.
    """
    with pytest.raises(SystemExit) as exc_info:
        main([])
    assert exc_info.value.code == 2


def test_parser_lists_every_subcommand():
    """
    Test that all seven subcommands are registered.
    """
    help_text = build_parser().format_help()
    for command in ("parse", "smashword", "train", "score", "eval-loo", "tlds", "synth"):
        assert command in help_text


@pytest.mark.parametrize(
    "domain, expected",
    [
        ("www.website.com", "sub=www dom=website tld=com"),
        ("example.com", "sub=- dom=example tld=com"),
        ("a.b.example.co.uk", "sub=a.b dom=example tld=co.uk"),
        ("co.uk", "sub=- dom=- tld=co.uk"),
    ],
)
def test_parse_command(capsys, suffix_file, domain, expected):
    """
    Test the one-line split printed by ``parse``.

    Args:
        capsys: pytest fixture to capture stdout/stderr
        suffix_file: Suffix list written to a temporary file
        domain: Input name
        expected: Expected stdout line
    """
    assert main(["parse", domain, "--suffix-list", str(suffix_file)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == expected


@pytest.mark.parametrize("domain", ["", "bad name.com"])
def test_parse_command_rejects_bad_names(capsys, suffix_file, domain):
    """
    Test that empty and invalid names exit 1 with an error on stderr.

    Args:
        capsys: pytest fixture to capture stdout/stderr
        suffix_file: Suffix list written to a temporary file
        domain: Invalid input name
    """
    assert main(["parse", domain, "--suffix-list", str(suffix_file)]) == EXIT_ERROR
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "❌" in captured.err


def test_missing_input_file_exits_1(capsys, tmp_path):
    """
    Test that a missing suffix list is reported, not raised.

    Args:
        capsys: pytest fixture to capture stdout/stderr
        tmp_path: pytest's temporary directory
    """
    code = main(["parse", "example.com", "--suffix-list", str(tmp_path / "absent.dat")])
    assert code == EXIT_ERROR
    assert "absent.dat" in capsys.readouterr().err


def test_smashword_command(capsys, synthetic_fixture):
    """
    Test the per-family table printed by ``smashword``.

    Args:
        capsys: pytest fixture to capture stdout/stderr
        synthetic_fixture: Paths of the synthetic fixture files
    """
    code = main(
        [
            "smashword",
            "--wordlist", str(synthetic_fixture.wordlist),
            "--domains", str(synthetic_fixture.dataset),
        ]
    )  # fmt: skip
    assert code == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "family\tn\tavg_length\tavg_entropy\tavg_smashword"
    families = [line.split("\t")[0] for line in lines[1:]]
    assert sorted(families) == ["clean", "hexnum", "randchar", "wordpair"]
    assert families[0] == "wordpair"


def test_smashword_command_with_suffix_list(capsys, tmp_path, suffix_file, wordlist):
    """
    Test that --suffix-list keeps the ``co`` of ``co.uk`` out of the score.

    Args:
        capsys: pytest fixture to capture stdout/stderr
        tmp_path: pytest's temporary directory
        suffix_file: Suffix list written to a temporary file
        wordlist: The 50-word test wordlist
    """
    words = tmp_path / "words.txt"
    words.write_text("\n".join(wordlist) + "\n", encoding="utf-8")
    dataset = tmp_path / "data.tsv"
    dataset.write_text("applegarden.co.uk\tclean\tclean\n", encoding="utf-8")
    base = ["smashword", "--wordlist", str(words), "--domains", str(dataset)]

    scores = []
    for extra in ([], ["--suffix-list", str(suffix_file)]):
        capsys.readouterr()
        assert main(base + extra) == EXIT_OK
        scores.append(float(capsys.readouterr().out.splitlines()[1].split("\t")[4]))
    assert scores[1] > scores[0]


def test_tlds_command(capsys, synthetic_fixture):
    """
    Test that ``tlds`` lists only DGA-heavy suffixes.

    Args:
        capsys: pytest fixture to capture stdout/stderr
        synthetic_fixture: Paths of the synthetic fixture files
    """
    code = main(
        [
            "tlds",
            "--dataset", str(synthetic_fixture.dataset),
            "--suffix-list", str(synthetic_fixture.suffixes),
        ]
    )  # fmt: skip
    assert code == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "tld\tn_dga\tn_clean\tratio"
    listed = {line.split("\t")[0] for line in lines[1:]}
    assert listed and listed <= {"ru", "info", "biz", "cc", "net", "org", "com"}
    assert "de" not in listed


def test_synth_command(capsys, tmp_path):
    """
    Test that ``synth`` writes and prints the four fixture files.

    Args:
        capsys: pytest fixture to capture stdout/stderr
        tmp_path: pytest's temporary directory
    """
    out_dir = tmp_path / "synth"
    code = main(["synth", "--out-dir", str(out_dir), "--n-dga", "6", "--n-clean", "4"])
    assert code == EXIT_OK
    printed = capsys.readouterr().out.splitlines()
    assert len(printed) == 4
    assert all(Path(p).is_file() for p in printed)


def test_train_requires_reference_date(synthetic_fixture, tmp_path):
    """
    Test that training with a snapshot but no reference date exits 1.

    Args:
        synthetic_fixture: Paths of the synthetic fixture files
        tmp_path: pytest's temporary directory
    """
    code = main(
        [
            "train",
            "--dataset", str(synthetic_fixture.dataset),
            "--suffix-list", str(synthetic_fixture.suffixes),
            "--whois-snapshot", str(synthetic_fixture.whois),
            "--out", str(tmp_path / "model.txt"),
        ]
    )  # fmt: skip
    assert code == EXIT_ERROR
    assert not (tmp_path / "model.txt").exists()


def test_train_then_score(capsys, trained_model):
    """
    Test that ``score`` prints one probability per domain.

    Args:
        capsys: pytest fixture to capture stdout/stderr
        trained_model: Path of a CLI-trained model
    """
    capsys.readouterr()
    code = main(["score", "--model", str(trained_model), "www.garden12.com", "qzxkvjwpt.ru"])
    assert code == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert [line.split("\t")[0] for line in lines] == ["www.garden12.com", "qzxkvjwpt.ru"]
    for line in lines:
        assert 0.0 <= float(line.split("\t")[1]) <= 1.0


def test_score_with_snapshot_needs_reference_date(trained_model, synthetic_fixture):
    """
    Test that WHOIS scoring without a reference date exits 1.

    Args:
        trained_model: Path of a CLI-trained model
        synthetic_fixture: Paths of the synthetic fixture files
    """
    code = main(
        [
            "score",
            "--model", str(trained_model),
            "--whois-snapshot", str(synthetic_fixture.whois),
            "example.com",
        ]
    )  # fmt: skip
    assert code == EXIT_ERROR


def test_score_rejects_corrupt_model(tmp_path):
    """
    Test that a malformed model file exits 1.

    Args:
        tmp_path: pytest's temporary directory
    """
    model = tmp_path / "model.txt"
    model.write_text("not a model\n", encoding="utf-8")
    assert main(["score", "--model", str(model), "example.com"]) == EXIT_ERROR


def test_bad_reference_date_is_a_usage_error(tmp_path):
    """
    Test that an unparseable --reference-date is rejected by argparse.

    Args:
        tmp_path: pytest's temporary directory
    """
    with pytest.raises(SystemExit) as exc_info:
        main(["score", "--model", "m.txt", "--reference-date", "soon", "example.com"])
    assert exc_info.value.code == 2


def test_keyboard_interrupt_exits_130(capsys, suffix_file):
    """
    Test that Ctrl+C is reported and mapped to exit code 130.

    Args:
        capsys: pytest fixture to capture stdout/stderr
        suffix_file: Suffix list written to a temporary file
    """
    with patch("dga_detector.cli.split_domain", side_effect=KeyboardInterrupt):
        code = main(["parse", "example.com", "--suffix-list", str(suffix_file)])
    assert code == EXIT_INTERRUPTED
    assert "stopped by user" in capsys.readouterr().err.lower()


def test_unexpected_exception_is_logged(capsys, suffix_file):
    """
    Test that a bug surfaces as exit code 1 with a traceback in the log.

    Args:
        capsys: pytest fixture to capture stdout/stderr
        suffix_file: Suffix list written to a temporary file
    """
    with patch("dga_detector.cli.split_domain", side_effect=RuntimeError("Test error")):
        code = main(["parse", "example.com", "--suffix-list", str(suffix_file)])
    assert code == EXIT_ERROR
    err = capsys.readouterr().err
    assert "Fatal error: Test error" in err
    assert "Traceback" in err


def test_quiet_mode_hides_info_logs(capsys, suffix_file, isolated_env):
    """
    Test that DGA_QUIET=true keeps INFO messages off stderr.

    Args:
        capsys: pytest fixture to capture stdout/stderr
        suffix_file: Suffix list written to a temporary file
        isolated_env: monkeypatch with DGA_* variables cleared
    """
    isolated_env.setenv("DGA_QUIET", "true")
    assert main(["parse", "example.com", "--suffix-list", str(suffix_file)]) == EXIT_OK
    assert "INFO" not in capsys.readouterr().err


def test_cli_main_as_module():
    """
    Test that ``python -m dga_detector --help`` works.
    """
    result = subprocess.run(
        [sys.executable, "-m", "dga_detector", "--help"],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert "dga_detect" in result.stdout
