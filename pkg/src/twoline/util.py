'''
Random utilities that are used across many twoline modules: logging levels,
the output directory, packaged problems, problem files and CSV output.
'''

# core libraries
import configparser
import csv
import errno
import logging
import math
import os

# third party libraries
from appdirs import user_data_dir
import pkg_resources

# twoline libraries
from . claims import ClaimDistribution
from . exceptions import DomainError, InitializationError, ValidationError
from . model import DividendMode, LineSpec, ProblemSpec

# constants
PACKAGED_PROBLEMS = ["case_a", "case_b", "case_c", "uncapped_uniform", "uncapped_exp"]
USER_DATA_DIR = user_data_dir("twoline", "twoline")
RUNS_DIR = os.path.join(USER_DATA_DIR, "runs")
SIGNIFICANT_DIGITS = 12

# for verbosity
LOGGING_LEVELS = {
    "0": logging.CRITICAL,
    "1": logging.ERROR,
    "2": logging.WARNING,
    "3": logging.INFO,
    "4": logging.DEBUG,
}

LINE_KEYS = ("kappa", "cbar", "dist")
MODEL_KEYS = ("delta", "a", "mode")

def create_directory(directory):
    '''
    Create a directory, if necessary.
    '''
    # ensure directory exists
    try:
        os.makedirs(directory)
        logging.debug("Created the directory at: %s", directory)
    except OSError as os_error:
        # ignore if it already exists
        if os_error.errno == errno.EEXIST:
            logging.debug("Directory '%s' already exists", directory)
        elif os_error.errno in (errno.EACCES, errno.EPERM):
            logging.warning("Directory '%s' is inaccessible because of a permissions error", directory)
            raise InitializationError("The directory '{}' is inaccessible because of a permissions error. Please " \
                                      "modify the ownership or permissions of the directory and try " \
                                      "again.".format(directory))
        else:
            raise

def packaged_problem(name):
    '''
    Path of one of the packaged problem files.
    '''
    if name not in PACKAGED_PROBLEMS:
        logging.warning("Unknown packaged problem '%s'", name)
        raise ValidationError("'{}' is not a packaged problem. The packaged problems are: " \
                              "{}".format(name, ", ".join(PACKAGED_PROBLEMS)))
    path = pkg_resources.resource_filename("twoline", os.path.join("data", "{}.config".format(name)))
    if not os.path.exists(path):
        logging.warning("Packaged problem file '%s' does not exist!", path)
        raise InitializationError("The packaged problem '{}' cannot be found in the package installation. " \
                                  "twoline can be reinstalled to solve this problem.".format(name))
    return path

def available_problems():
    '''
    Names of the packaged problems whose files are present.
    '''
    available = []
    for name in PACKAGED_PROBLEMS:
        path = pkg_resources.resource_filename("twoline", os.path.join("data", "{}.config".format(name)))
        if os.path.exists(path):
            available.append(name)
        else:
            logging.debug("'%s' is missing from the installation, skipping...", path)
    return available

def format_number(value):
    '''
    A number as CSV text with 12 significant digits.
    '''
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, int)):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return "{:.{}g}".format(value, SIGNIFICANT_DIGITS)

def write_csv(path, header, rows):
    '''
    Write a header row and data rows, numbers through format_number.
    '''
    with open(path, "w", newline="") as csv_ref:
        writer = csv.writer(csv_ref)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(value) for value in row])
    logging.debug("Wrote %d rows to %s", len(rows), path)

def _key_lines(text):
    '''
    Map (section, key) to the 1-based line on which the key is set.
    '''
    lines = {}
    section = None
    for number, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if not stripped or stripped[0] in "#;":
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
            lines[(section, None)] = number
            continue
        for separator in ("=", ":"):
            if separator in stripped:
                lines[(section, stripped.split(separator, 1)[0].strip().lower())] = number
                break
    return lines

def _number(parser, lines, section, key, required=True):
    if not parser.has_option(section, key):
        if required:
            raise ValidationError("[{}] is missing the key '{}'".format(section, key),
                                  lines.get((section, None)))
        return None
    text = parser.get(section, key)
    try:
        return float(text)
    except ValueError:
        raise ValidationError("[{}] {} = '{}' is not a number".format(section, key, text),
                              lines.get((section, key)))

def _line(parser, lines, section, bounded, base_dir):
    if not parser.has_section(section):
        raise ValidationError("The problem file has no [{}] section".format(section))
    unknown = [key for key in parser.options(section) if key not in LINE_KEYS]
    if unknown:
        raise ValidationError("[{}] has the unknown key '{}'".format(section, unknown[0]),
                              lines.get((section, unknown[0])))
    kappa = _number(parser, lines, section, "kappa")
    cbar = _number(parser, lines, section, "cbar", required=bounded)
    if not parser.has_option(section, "dist"):
        raise ValidationError("[{}] is missing the key 'dist'".format(section), lines.get((section, None)))
    try:
        dist = ClaimDistribution.from_spec(parser.get(section, "dist"), base_dir)
    except (DomainError, ValidationError) as err:
        raise ValidationError(str(err), lines.get((section, "dist")))
    try:
        return LineSpec(kappa, dist, cbar)
    except DomainError as err:
        key = "cbar" if str(err).startswith("cbar") else "kappa"
        raise ValidationError(str(err), lines.get((section, key)))

def parse_problem(text, name=None, base_dir=None):
    '''
    Build a ProblemSpec from the text of a problem file.
    '''
    lines = _key_lines(text)
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except (configparser.MissingSectionHeaderError, configparser.DuplicateOptionError,
            configparser.DuplicateSectionError) as err:
        logging.error("Problem file %s could not be parsed: %s", name, err)
        raise ValidationError(err.message.splitlines()[0], getattr(err, "lineno", None))
    except configparser.ParsingError as err:
        line_number, _ = err.errors[0]
        logging.error("Problem file %s could not be parsed at line %s", name, line_number)
        raise ValidationError("the problem file could not be parsed", line_number)

    try:
        if not parser.has_section("model"):
            raise ValidationError("The problem file has no [model] section")
        unknown = [key for key in parser.options("model") if key not in MODEL_KEYS]
        if unknown:
            raise ValidationError("[model] has the unknown key '{}'".format(unknown[0]),
                                  lines.get(("model", unknown[0])))
        mode_text = parser.get("model", "mode", fallback=DividendMode.BOUNDED.value).strip().lower()
        try:
            mode = DividendMode(mode_text)
        except ValueError:
            raise ValidationError("[model] mode must be bounded or unbounded, not '{}'".format(mode_text),
                                  lines.get(("model", "mode")))
        bounded = mode is DividendMode.BOUNDED
        delta = _number(parser, lines, "model", "delta")
        a = _number(parser, lines, "model", "a")
        line1 = _line(parser, lines, "line1", bounded, base_dir)
        line2 = _line(parser, lines, "line2", bounded, base_dir)
        try:
            return ProblemSpec(line1, line2, delta, a, mode, name)
        except (DomainError, ValidationError) as err:
            raise ValidationError(str(err), lines.get(("model", None)))
    except ValidationError as err:
        logging.error("Problem file %s is invalid: %s", name, err)
        raise

def load_problem(path):
    '''
    Read and validate a problem file. Claim tables are resolved relative to
    the file's directory.
    '''
    try:
        with open(path, "r") as problem_ref:
            text = problem_ref.read()
    except OSError as os_error:
        logging.error("Problem file '%s' could not be opened", path)
        raise ValidationError("The problem file '{}' could not be read: {}".format(path, os_error.strerror))
    name = os.path.splitext(os.path.basename(path))[0]
    return parse_problem(text, name, os.path.dirname(os.path.abspath(path)))
