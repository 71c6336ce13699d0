//! Holds the `acceptance` test target. It lives in its own package so that
//! it runs after the `pisum` test targets and a failing criterion does not
//! stop them.
