class Recovering {
    private StringBuilder mBuilder;
    private String mName;

    void render(StringBuilder sb) {
        mName = mName.trim();
    }

    public void flush() {
        @@@@
        // <start>
        render(buf);
        // <end>
    }
}
