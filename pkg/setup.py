from setuptools import setup, find_packages


setup(
    name='gfmlab',
    version='0.3.1',
    packages=find_packages(exclude=['tests', 'tests.*']),
    install_requires=[
        'numpy>=1.20',
        'intervaltree',
        'parse',
        'configparser',
    ],
    tests_require=['pytest'],
    extras_require={'test': ['pytest']},
    entry_points={
        'console_scripts': ['gfmlab=gfmlab.cli:main'],
    },
    include_package_data=True,
    description='Desk-scale lab for model extraction attacks on graph '
                'foundation models',
)
