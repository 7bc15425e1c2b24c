//! Empty library stub; the crate exists for its benchmark targets.
