'''
Tells setup.py which part of the semantic version to bump on the next build.
'''

# core libraries
from enum import Enum

class VersionBump(Enum):
    '''
    The part of major.minor.update that moves.
    '''
    UPDATE = "UPDATE"
    MINOR = "MINOR"
    MAJOR = "MAJOR"


# set exactly one; a new closure method or output column is a MINOR bump,
# a changed problem file format is MAJOR
VERSION_BUMP = VersionBump.UPDATE


def increment_version(version):
    '''
    Bump the (major, minor, update) tuple found by git describe. Bumping a
    part zeroes every part below it.
    '''
    major, minor, update = version
    if VERSION_BUMP is VersionBump.MAJOR:
        return (major + 1, 0, 0)
    if VERSION_BUMP is VersionBump.MINOR:
        return (major, minor + 1, 0)
    return (major, minor, update + 1)
