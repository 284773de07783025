//! JSON interchange (in progress).
