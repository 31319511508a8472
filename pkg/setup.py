from setuptools import setup

setup(
        name='funlib.learn.mpe',
        version='0.1',
        url='https://github.com/funkelab/funlib.learn.mpe',
        author='Jan Funke',
        author_email='funkej@janelia.hhmi.org',
        license='MIT',
        packages=[
            'funlib.learn.mpe',
            'funlib.learn.mpe.estimators',
            'funlib.learn.mpe.estimators.impl',
            'funlib.learn.mpe.models',
            'funlib.learn.mpe.harness',
        ],
        install_requires=[
            'numpy',
            'scipy',
            'pandas',
            'scikit-learn',
            'joblib',
        ],
        entry_points={
            'console_scripts': [
                'mpe=funlib.learn.mpe.harness.cli:main',
            ],
        }
)
