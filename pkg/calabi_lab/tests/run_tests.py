"""
Test runner script for calabi_lab package
"""
import os
import sys
import unittest

# Add the parent directory to the Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from calabi_lab.tests.test_calabi import TestDualExponent, TestInvariantReport, TestPotential, TestTransforms
from calabi_lab.tests.test_diffgeom import (TestDerivatives, TestGeometry, TestGrid, TestParametricCurvature,
                                            TestResidual)
from calabi_lab.tests.test_hyperbolic import (TestCurvature, TestGrimReaper, TestHalfwidth, TestHyperbolicProfile,
                                              TestMeshes)
from calabi_lab.tests.test_mesh import TestFieldIO, TestSurfaceMesh
from calabi_lab.tests.test_presets import TestPresets
from calabi_lab.tests.test_radial import (TestEuclideanProfiles, TestForcing, TestLorentzianProfiles,
                                          TestTransformedCurves)
from calabi_lab.tests.test_report_store import TestReportStore
from calabi_lab.tests.test_shell import TestShell
from calabi_lab.tests.test_weights import TestWeights

TEST_CASES = [
    TestWeights,
    TestGrid, TestDerivatives, TestGeometry, TestResidual, TestParametricCurvature,
    TestPotential, TestTransforms, TestDualExponent, TestInvariantReport,
    TestEuclideanProfiles, TestTransformedCurves, TestLorentzianProfiles, TestForcing,
    TestHyperbolicProfile, TestHalfwidth, TestCurvature, TestMeshes, TestGrimReaper,
    TestSurfaceMesh, TestFieldIO,
    TestReportStore,
    TestPresets,
    TestShell,
]


def run_tests():
    """Run all tests"""
    # Create test suite
    suite = unittest.TestSuite([unittest.TestLoader().loadTestsFromTestCase(case) for case in TEST_CASES])

    # Run tests
    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(suite)

    # Return 0 if tests passed, 1 if any failed
    return 0 if result.wasSuccessful() else 1


if __name__ == '__main__':
    sys.exit(run_tests())
