from pathlib import Path

from setuptools import find_packages, setup

requirements = [
    line.strip() for line in Path(__file__).with_name("requirements.txt").read_text().splitlines()
    if line.strip() and not line.startswith("pytest")
]

setup(
    name="drift-pqc",
    version="1.0.0",
    description="Noise-aware training and drift replay of parameterized quantum circuits",
    packages=find_packages(include=["quantum", "calibration", "classifier", "middleware", "utils"]),
    py_modules=["app", "config", "train_model", "download_dataset"],
    install_requires=requirements,
    entry_points={"console_scripts": ["drift-pqc = app:main"]},
    python_requires=">=3.9",
    zip_safe=False,
)
