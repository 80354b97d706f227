package com.example;

import javax.inject.Inject;

public class B {
    @Inject
    I i;

    public String run() {
        return i.greet("b");
    }
}
