EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_ERROR = 2


def verdict(passed: bool) -> int:
    return EXIT_PASS if passed else EXIT_FAIL
