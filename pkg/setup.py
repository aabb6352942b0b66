from setuptools import setup, find_packages

setup(name='centrack',
      packages=find_packages('src'),
      package_dir={'':'src'},
      version='0.1.0',
      python_requires='>=3.8',
      install_requires=['numpy', 'scipy', 'pandas', 'PyYAML', 'easydict', 'sacred', 'tqdm'],
      entry_points={'console_scripts': ['centrack = centrack.cli:main']},)
