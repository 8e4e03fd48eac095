#!/usr/bin/env python3
"""
DQLS Toolkit Installer
Dependency install, directory creation and default configuration
"""

import subprocess
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent / "src"))


def print_banner():
    print("=" * 60)
    print("  DQLS Toolkit - Installation Script")
    print("=" * 60)
    print()


def check_python_version() -> bool:
    print("Checking Python version...")
    if sys.version_info < (3, 8):
        print(f"❌ Python 3.8+ is required. Found Python {sys.version_info.major}.{sys.version_info.minor}")
        return False
    print(f"✅ Python {sys.version_info.major}.{sys.version_info.minor}.{sys.version_info.micro}")
    return True


def install_dependencies() -> bool:
    """Install requirements.txt and check the numerical stack imports"""
    print("Installing dependencies...")
    if not Path("requirements.txt").exists():
        print("❌ requirements.txt not found")
        return False
    try:
        subprocess.run([sys.executable, "-m", "pip", "install", "-r", "requirements.txt"], check=True)
    except subprocess.CalledProcessError as e:
        print(f"❌ Failed to install dependencies: {e}")
        return False

    try:
        import numpy
        import scipy
        import yaml
        print(f"✅ numpy {numpy.__version__}, scipy {scipy.__version__}, PyYAML {yaml.__version__}")
    except ImportError as e:
        print(f"❌ Core import failed: {e}")
        return False
    return True


def create_directories():
    print("Creating directories...")
    for directory in ["config", "logs", "reports"]:
        Path(directory).mkdir(exist_ok=True)
        print(f"✅ Created directory: {directory}")


def setup_configuration() -> bool:
    """Write config/dqls_config.yaml from the built-in defaults if missing"""
    from dqls_config import CONFIG_FILE_NAME, get_default_config, save_config

    config_file = Path("config") / CONFIG_FILE_NAME
    if config_file.exists():
        print("✅ Configuration file already exists")
        return True
    save_config(get_default_config(), config_file)
    print(f"✅ Created default configuration file {config_file}")
    return True


def test_installation() -> bool:
    print("Running selftest...")
    result = subprocess.run([sys.executable, "main.py", "selftest"], capture_output=True, text=True)
    if result.returncode != 0:
        print("❌ Selftest failed; see the session log under logs/")
        print(result.stdout)
        return False
    print("✅ Selftest passed")
    return True


def print_next_steps():
    print("\n" + "=" * 60)
    print("  Installation Complete!")
    print("=" * 60)
    print()
    print("Try:")
    print("   ./run_dqls.sh check --state ghz:3")
    print("   ./run_dqls.sh table --db 3 --da-range 2:3 --dbar-range 0:4 --seeds 5")
    print()
    print("Settings live in config/dqls_config.yaml; see README.md")
    print()


def main() -> bool:
    print_banner()
    if not check_python_version():
        return False
    if not install_dependencies():
        return False
    create_directories()
    if not setup_configuration():
        return False
    if not test_installation():
        return False
    print_next_steps()
    return True


if __name__ == "__main__":
    try:
        if not main():
            print("\n❌ Installation failed. Please check the errors above.")
            sys.exit(1)
    except KeyboardInterrupt:
        print("\n\n⚠️  Installation cancelled by user")
        sys.exit(1)
