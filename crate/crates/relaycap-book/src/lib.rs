//! Guide chapters are attached as doc-tests once the book is written.
