import platform
import sys
from importlib.metadata import PackageNotFoundError, version

_OS_PREFIXES = (("darwin", "macOS"), ("win", "Windows"), ("linux", "Linux"))
_ARCH_NAMES = {"x86_64": "x86_64", "amd64": "x86_64", "i386": "x86", "i686": "x86"}

# numerical results depend on these
_TRACKED_PACKAGES = ("numpy", "scipy", "networkx", "scikit-learn")


def get_os_and_arch():
    os_name = next((name for prefix, name in _OS_PREFIXES if sys.platform.startswith(prefix)), "Unknown")
    machine = platform.machine().lower()
    if machine.startswith(("arm", "aarch")):
        arch = "ARM64"
    else:
        arch = _ARCH_NAMES.get(machine, "Unknown")
    return os_name, arch


def _package_version(name):
    try:
        return version(name)
    except PackageNotFoundError:
        return "missing"


def describe_host():
    """Host facts echoed into run manifests. Versions only, no hostnames or paths."""
    os_name, arch = get_os_and_arch()
    facts = {"os": os_name, "arch": arch, "python": platform.python_version()}
    facts.update({name: _package_version(name) for name in _TRACKED_PACKAGES})
    return facts
