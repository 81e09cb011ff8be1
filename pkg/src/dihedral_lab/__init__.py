"""Numerical toolkit for curvature, dihedral-angle and cone-spectrum checks
on metric polyhedral domains.

Subpackages:

- ``expressions``      scalar expression parser / evaluator and metric fields
- ``curvature``        Christoffel symbols, Riemann/Ricci/scalar curvature,
                       second fundamental forms, dihedral angles, Gauss-Bonnet
- ``clifford``         concrete Clifford modules, boundary projectors and the
                       Clifford/exterior-form dictionary
- ``comparison``       map norms, endomorphism PSD certificates, hypothesis /
                       conclusion margin reports, conformal identities
- ``sector_spectra``   closed-form and discretized spectra of the arc-link
                       operator, modified Bessel deficiency test, Hardy bound
- ``corner_smoothing`` circular-arc corner fillets and turning integrals
- ``index_lab``        discrete de Rham complexes on polygons and the
                       index-versus-degree experiment
- ``cli``              command line front end
"""

__version__ = "0.1.0"
