class Formatter {
    private Locale mLocale;
    private String mTag;

    void apply(Locale loc) {
        mTag = mTag.trim();
    }

    public void localize() {
        // <start>
        apply(locale);
        // <end>
    }
}
