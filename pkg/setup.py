from setuptools import setup

with open("requirements.txt") as requirements_file:
    requirements = [
        line.strip()
        for line in requirements_file
        if line.strip() and not line.startswith(("pytest", "mpmath"))
    ]

setup(
    name="thimble",
    version="1.0.0",
    description="Real-time path integrals on Lefschetz thimbles: complex saddles, flows and kernels.",
    package_dir={"thimble": "src/thimble", "utils": "src/utils", "": "."},
    packages=["thimble", "utils"],
    py_modules=["config"],
    install_requires=requirements,
    extras_require={"test": ["pytest==7.4.0", "mpmath==1.3.0"]},
    entry_points={"console_scripts": ["thimble=thimble.cli:main"]},
    python_requires=">=3.8",
)
