from setuptools import setup, find_packages

with open("README.md", "r",encoding="utf-8") as f:
    long_description = f.read()

setup(
    name='VS_StabCert',
    version='0.1.0',
    author='Meng-Lin Tsai',
    author_email='mtsai47@wisc.edu',
    url = "https://avraamidougroup.che.wisc.edu",
    description='Numerical certification of nonlinear stability for viscous shock profiles',
    packages= find_packages(exclude=["tests"]),
    long_description=long_description,
    long_description_content_type="text/markdown",
    install_requires=[
        "numpy>=1.20.0",
        "scipy>=1.10.0",
        "tqdm>=4.0.0",
        "pandas>=2.0.0"
    ],
    extras_require={
        "test": ["pytest>=7.0", "hypothesis>=6.0"],
    },
    entry_points={
        "console_scripts": ["vs-stabcert=VS_StabCert.cli:main"],
    },
    classifiers=[
    'Programming Language :: Python :: 3',
    'License :: OSI Approved :: MIT License',
    'Operating System :: OS Independent',
    ],
    python_requires='>=3.8',
)
